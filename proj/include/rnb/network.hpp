// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Network description: an ordered list of blocks, each an ordered list of
 * layers, plus reuse annotations that bind several blocks (block-wise) or
 * layers (layer-wise) to one basic weight block.
 *
 * JSON form:
 *
 *   {
 *     "name": "mlp",
 *     "input": [8],                       // activation shape entering b_1
 *     "blocks": [
 *       {"name": "b1", "layers": [
 *         {"kind": "dense", "name": "fc1", "in": 8, "out": 8},
 *         {"kind": "relu"},
 *         {"kind": "norm", "channels": 8, "scale": 1.0, "offset": 0.0},
 *         {"kind": "conv2d", "cin": 1, "cout": 4, "k": 3, "stride": 1, "pad": 0}
 *       ]}
 *     ],
 *     "reuse": [
 *       {"basic": "fc1", "members": ["fc1", "fc2"], "granularity": "layer-wise",
 *        "transforms": [{"kind": "identity"}, {"kind": "channel_shuffle", "g": 2}]}
 *     ]
 *   }
 *
 * Missing block names default to "b<m>", missing layer names to
 * "<block>.l<n>" (both 1-based). Only parametric layers (dense, conv2d, norm)
 * take part in reuse; relu is stateless.
 */

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnb/error.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"

namespace rnb {

enum class LayerKind { dense, conv2d, relu, norm };

inline std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::norm: return "norm";
  }
  return "unknown";
}

struct LayerDesc {
  LayerKind kind = LayerKind::dense;
  std::string name;
  // dense
  std::size_t in = 0, out = 0;
  // conv2d
  std::size_t cin = 0, cout = 0, k = 1, stride = 1, pad = 0;
  // norm (per channel affine)
  std::size_t channels = 0;
  double scale = 1.0, offset = 0.0;

  bool parametric() const { return kind != LayerKind::relu; }
  /// Layers whose weights live on MRR tiles.
  bool optical() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }

  std::string weight_key() const { return name + ".weight"; }
  std::string scale_key() const { return name + ".scale"; }
  std::string offset_key() const { return name + ".offset"; }

  /// Rows x cols of the matrix programmed onto tiles.
  std::pair<std::size_t, std::size_t> matrix_dims() const {
    if (kind == LayerKind::dense) return {out, in};
    return {cout, cin * k * k};
  }

  Shape weight_shape() const {
    if (kind == LayerKind::dense) return {out, in};
    if (kind == LayerKind::conv2d) return {cout, cin, k, k};
    return {channels};
  }

  std::size_t parameter_count() const {
    switch (kind) {
      case LayerKind::dense: return in * out;
      case LayerKind::conv2d: return cout * cin * k * k;
      case LayerKind::norm: return 2 * channels;
      case LayerKind::relu: return 0;
    }
    return 0;
  }
};

struct BlockDesc {
  std::string name;
  std::vector<LayerDesc> layers;
};

enum class Granularity { layer_wise, block_wise };

inline std::string to_string(Granularity g) {
  return g == Granularity::layer_wise ? "layer-wise" : "block-wise";
}

struct ReuseSpec {
  std::string basic;
  std::vector<std::string> members;
  Granularity granularity = Granularity::layer_wise;
  std::vector<ObuTransform> transforms;  // one per member
};

struct NetworkDesc {
  std::string name;
  Shape input_shape;
  std::vector<BlockDesc> blocks;
  std::vector<ReuseSpec> reuse;

  std::size_t block_index(const std::string& name) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].name == name) return i;
    return npos;
  }

  /// (block, layer) of a named layer.
  std::optional<std::pair<std::size_t, std::size_t>> find_layer(const std::string& name) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t l = 0; l < blocks[b].layers.size(); ++l)
        if (blocks[b].layers[l].name == name) return std::make_pair(b, l);
    return std::nullopt;
  }

  const LayerDesc& layer(const std::string& name) const {
    auto at = find_layer(name);
    if (!at) throw Error(ErrorCode::schema, "unknown layer '" + name + "'");
    return blocks[at->first].layers[at->second];
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// One executable layer after reuse resolution.
struct ResolvedLayer {
  const LayerDesc* desc = nullptr;  // the member's own declaration
  std::string param_name;           // layer holding the trained parameters (the basic)
  std::string matrix_key;           // tile-mapped matrix this use reads
  std::optional<ObuTransform> pre_transform;  // activation transform before the layer
  bool weight_transposed = false;   // vertical (transposed) tile input
  std::size_t block = 0;
  Shape in_shape, out_shape;
};

// ---------------------------------------------------------------------------
// Shape rules

inline Shape layer_output_shape(const LayerDesc& l, const Shape& in, const std::string& where) {
  switch (l.kind) {
    case LayerKind::dense:
      if (numel(in) != l.in) {
        throw Error(ErrorCode::dimension, where + ": dense '" + l.name + "' expects " +
                                              std::to_string(l.in) + " inputs, got " +
                                              shape_str(in));
      }
      return {l.out};
    case LayerKind::conv2d: {
      if (in.size() != 3 || in[0] != l.cin) {
        throw Error(ErrorCode::dimension, where + ": conv2d '" + l.name + "' expects [" +
                                              std::to_string(l.cin) + "xHxW], got " +
                                              shape_str(in));
      }
      const std::size_t hp = in[1] + 2 * l.pad, wp = in[2] + 2 * l.pad;
      if (l.k > hp || l.k > wp) {
        throw Error(ErrorCode::dimension, where + ": conv2d '" + l.name + "' kernel " +
                                              std::to_string(l.k) + " larger than padded input " +
                                              shape_str(in));
      }
      return {l.cout, (hp - l.k) / l.stride + 1, (wp - l.k) / l.stride + 1};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::norm:
      if (in.empty() || in[0] != l.channels) {
        throw Error(ErrorCode::dimension, where + ": norm '" + l.name + "' expects " +
                                              std::to_string(l.channels) + " channels, got " +
                                              shape_str(in));
      }
      return in;
  }
  return in;
}

/// Member layer must match the basic under the member's transform: a
/// transpose swaps dense dims, everything else preserves them.
inline void check_member_compatible(const LayerDesc& basic, const LayerDesc& member,
                                    const ObuTransform& t) {
  auto fail = [&](const std::string& expected) {
    throw Error(ErrorCode::schedule, "reuse member '" + member.name + "' is incompatible with basic '" +
                                         basic.name + "': expected " + expected);
  };
  if (basic.kind != member.kind) fail(to_string(basic.kind) + " layer");
  const bool transposed = t.kind == ObuTransform::Kind::transpose;
  switch (basic.kind) {
    case LayerKind::dense: {
      const std::size_t want_in = transposed ? basic.out : basic.in;
      const std::size_t want_out = transposed ? basic.in : basic.out;
      if (member.in != want_in || member.out != want_out) {
        fail("dense(in=" + std::to_string(want_in) + ", out=" + std::to_string(want_out) + ")");
      }
      break;
    }
    case LayerKind::conv2d:
      if (member.cin != basic.cin || member.cout != basic.cout || member.k != basic.k ||
          member.stride != basic.stride || member.pad != basic.pad) {
        fail("conv2d(cin=" + std::to_string(basic.cin) + ", cout=" + std::to_string(basic.cout) +
             ", k=" + std::to_string(basic.k) + ", stride=" + std::to_string(basic.stride) +
             ", pad=" + std::to_string(basic.pad) + ")");
      }
      break;
    case LayerKind::norm:
      if (member.channels != basic.channels) {
        fail("norm(channels=" + std::to_string(basic.channels) + ")");
      }
      break;
    case LayerKind::relu:
      break;
  }
}

/// Resolves reuse into per-layer parameter bindings and transforms and
/// checks every shape. With `share == false` each member keeps its own
/// tile-mapped matrix (the unshared twin with identical function).
inline std::vector<ResolvedLayer> resolve_network(const NetworkDesc& net, bool share = true) {
  if (net.blocks.empty()) throw Error(ErrorCode::schema, "$.blocks: network needs at least one block");
  struct Binding {
    std::string basic_layer;
    ObuTransform transform;
    Granularity granularity = Granularity::layer_wise;
    bool block_entry = false;  // first layer of a block-wise member
  };
  std::map<std::string, Binding> bindings;
  for (std::size_t r = 0; r < net.reuse.size(); ++r) {
    const ReuseSpec& spec = net.reuse[r];
    const std::string where = "$.reuse[" + std::to_string(r) + "]";
    if (spec.members.empty()) throw Error(ErrorCode::schema, where + ".members: empty");
    if (spec.transforms.size() != spec.members.size()) {
      throw Error(ErrorCode::schema, where + ".transforms: need one transform per member");
    }
    if (spec.granularity == Granularity::layer_wise) {
      const LayerDesc& basic = net.layer(spec.basic);
      if (!basic.parametric()) throw Error(ErrorCode::schema, where + ".basic: relu has no weights");
      for (std::size_t m = 0; m < spec.members.size(); ++m) {
        const LayerDesc& member = net.layer(spec.members[m]);
        check_member_compatible(basic, member, spec.transforms[m]);
        if (bindings.count(member.name)) {
          throw Error(ErrorCode::schedule, "layer '" + member.name + "' is in more than one reuse group");
        }
        bindings[member.name] = {basic.name, spec.transforms[m], Granularity::layer_wise, false};
      }
    } else {
      const std::size_t bb = net.block_index(spec.basic);
      if (bb == NetworkDesc::npos) {
        throw Error(ErrorCode::schema, where + ".basic: unknown block '" + spec.basic + "'");
      }
      const BlockDesc& basic = net.blocks[bb];
      for (std::size_t m = 0; m < spec.members.size(); ++m) {
        const std::size_t mb = net.block_index(spec.members[m]);
        if (mb == NetworkDesc::npos) {
          throw Error(ErrorCode::schema, where + ".members[" + std::to_string(m) +
                                             "]: unknown block '" + spec.members[m] + "'");
        }
        const BlockDesc& member = net.blocks[mb];
        if (member.layers.size() != basic.layers.size()) {
          throw Error(ErrorCode::schedule, "reuse member block '" + member.name + "' has " +
                                               std::to_string(member.layers.size()) +
                                               " layers, basic '" + basic.name + "' has " +
                                               std::to_string(basic.layers.size()));
        }
        for (std::size_t l = 0; l < member.layers.size(); ++l) {
          const LayerDesc& ml = member.layers[l];
          check_member_compatible(basic.layers[l], ml, spec.transforms[m]);
          if (bindings.count(ml.name)) {
            throw Error(ErrorCode::schedule, "layer '" + ml.name + "' is in more than one reuse group");
          }
          bindings[ml.name] = {basic.layers[l].name, spec.transforms[m], Granularity::block_wise, l == 0};
        }
      }
    }
  }

  std::vector<ResolvedLayer> out;
  Shape shape = net.input_shape;
  if (shape.empty()) throw Error(ErrorCode::schema, "$.input: activation shape required");
  for (std::size_t b = 0; b < net.blocks.size(); ++b) {
    const BlockDesc& block = net.blocks[b];
    if (block.layers.empty()) {
      throw Error(ErrorCode::schema, "$.blocks[" + std::to_string(b) + "].layers: empty block");
    }
    for (std::size_t l = 0; l < block.layers.size(); ++l) {
      const LayerDesc& layer = block.layers[l];
      const std::string where = "$.blocks[" + std::to_string(b) + "].layers[" + std::to_string(l) + "]";
      ResolvedLayer rl;
      rl.desc = &layer;
      rl.block = b;
      rl.param_name = layer.name;
      rl.matrix_key = layer.name;
      auto it = bindings.find(layer.name);
      if (it != bindings.end()) {
        const Binding& bind = it->second;
        rl.param_name = bind.basic_layer;
        if (share) rl.matrix_key = bind.basic_layer;
        const ObuTransform& t = bind.transform;
        // Block-wise: shuffles act once at the block input, transposes on every layer.
        const bool layer_wise = bind.granularity == Granularity::layer_wise;
        if (t.is_shuffle() && (layer_wise || bind.block_entry)) {
          rl.pre_transform = t;
        } else if (t.kind == ObuTransform::Kind::transpose) {
          if (layer.kind == LayerKind::dense) {
            rl.weight_transposed = true;
          } else if (layer.kind == LayerKind::conv2d) {
            rl.pre_transform = t;
          }
        }
      }
      rl.in_shape = shape;
      if (rl.pre_transform) shape = transformed_shape(*rl.pre_transform, shape);
      shape = layer_output_shape(layer, shape, where);
      rl.out_shape = shape;
      out.push_back(std::move(rl));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::schema, path + "." + key + ": required field missing");
  }
  return obj.at(key);
}

inline std::size_t get_size(const nlohmann::json& obj, const char* key, const std::string& path,
                            std::optional<std::size_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::schema, path + "." + key + ": required field missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw Error(ErrorCode::schema, path + "." + key + ": expected a positive integer");
  }
  return v.get<std::size_t>();
}

inline std::size_t get_count(const nlohmann::json& obj, const char* key, const std::string& path,
                             std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::schema, path + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline double get_real(const nlohmann::json& obj, const char* key, const std::string& path,
                       double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(ErrorCode::schema, path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string get_string(const nlohmann::json& obj, const char* key, const std::string& path,
                              std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::schema, path + "." + key + ": required field missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) throw Error(ErrorCode::schema, path + "." + key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail

inline ObuTransform parse_transform(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::schema, path + ": expected an object");
  const std::string kind = detail::get_string(j, "kind", path);
  if (kind == "identity") return ObuTransform::identity();
  if (kind == "transpose") return ObuTransform::transpose();
  if (kind == "channel_shuffle") return ObuTransform::channel_shuffle(detail::get_size(j, "g", path));
  if (kind == "flattened_shuffle") {
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
        throw Error(ErrorCode::schema, path + ".seed: expected a non-negative integer");
      }
      seed = j["seed"].get<std::uint64_t>();
    }
    return ObuTransform::flattened_shuffle(detail::get_size(j, "block", path), seed);
  }
  throw Error(ErrorCode::schema, path + ".kind: unknown transform kind '" + kind + "'");
}

inline nlohmann::json transform_to_json(const ObuTransform& t) {
  nlohmann::json j;
  j["kind"] = to_string(t.kind);
  if (t.kind == ObuTransform::Kind::channel_shuffle) j["g"] = t.groups;
  if (t.kind == ObuTransform::Kind::flattened_shuffle) {
    j["block"] = t.block;
    j["seed"] = t.seed;
  }
  return j;
}

inline LayerDesc parse_layer(const nlohmann::json& j, const std::string& path,
                             const std::string& default_name) {
  if (!j.is_object()) throw Error(ErrorCode::schema, path + ": expected an object");
  LayerDesc l;
  const std::string kind = detail::get_string(j, "kind", path);
  l.name = detail::get_string(j, "name", path, default_name);
  if (kind == "dense") {
    l.kind = LayerKind::dense;
    l.in = detail::get_size(j, "in", path);
    l.out = detail::get_size(j, "out", path);
  } else if (kind == "conv2d") {
    l.kind = LayerKind::conv2d;
    l.cin = detail::get_size(j, "cin", path);
    l.cout = detail::get_size(j, "cout", path);
    l.k = detail::get_size(j, "k", path);
    l.stride = detail::get_size(j, "stride", path, 1);
    l.pad = detail::get_count(j, "pad", path, 0);
  } else if (kind == "relu") {
    l.kind = LayerKind::relu;
  } else if (kind == "norm") {
    l.kind = LayerKind::norm;
    l.channels = detail::get_size(j, "channels", path);
    l.scale = detail::get_real(j, "scale", path, 1.0);
    l.offset = detail::get_real(j, "offset", path, 0.0);
  } else {
    throw Error(ErrorCode::schema, path + ".kind: unknown layer kind '" + kind + "'");
  }
  return l;
}

inline NetworkDesc parse_netdesc_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::schema, "$: expected an object");
  NetworkDesc net;
  net.name = detail::get_string(j, "name", "$", "net");
  const auto& input = detail::require(j, "input", "$");
  if (!input.is_array() || input.empty()) {
    throw Error(ErrorCode::schema, "$.input: expected a non-empty array of dimensions");
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!input[i].is_number_integer() || input[i].get<long long>() < 1) {
      throw Error(ErrorCode::schema, "$.input[" + std::to_string(i) + "]: expected a positive integer");
    }
    net.input_shape.push_back(input[i].get<std::size_t>());
  }
  const auto& blocks = detail::require(j, "blocks", "$");
  if (!blocks.is_array() || blocks.empty()) {
    throw Error(ErrorCode::schema, "$.blocks: expected a non-empty array");
  }
  std::set<std::string> names;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string path = "$.blocks[" + std::to_string(b) + "]";
    BlockDesc block;
    block.name = detail::get_string(blocks[b], "name", path, "b" + std::to_string(b + 1));
    if (!names.insert(block.name).second) {
      throw Error(ErrorCode::schema, path + ".name: duplicate name '" + block.name + "'");
    }
    const auto& layers = detail::require(blocks[b], "layers", path);
    if (!layers.is_array() || layers.empty()) {
      throw Error(ErrorCode::schema, path + ".layers: expected a non-empty array");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string lpath = path + ".layers[" + std::to_string(l) + "]";
      LayerDesc layer = parse_layer(layers[l], lpath, block.name + ".l" + std::to_string(l + 1));
      if (!names.insert(layer.name).second) {
        throw Error(ErrorCode::schema, lpath + ".name: duplicate name '" + layer.name + "'");
      }
      block.layers.push_back(std::move(layer));
    }
    net.blocks.push_back(std::move(block));
  }
  if (j.contains("reuse")) {
    const auto& reuse = j["reuse"];
    if (!reuse.is_array()) throw Error(ErrorCode::schema, "$.reuse: expected an array");
    for (std::size_t r = 0; r < reuse.size(); ++r) {
      const std::string path = "$.reuse[" + std::to_string(r) + "]";
      ReuseSpec spec;
      spec.basic = detail::get_string(reuse[r], "basic", path);
      const auto& members = detail::require(reuse[r], "members", path);
      if (!members.is_array() || members.empty()) {
        throw Error(ErrorCode::schema, path + ".members: expected a non-empty array");
      }
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (!members[m].is_string()) {
          throw Error(ErrorCode::schema, path + ".members[" + std::to_string(m) + "]: expected a name");
        }
        spec.members.push_back(members[m].get<std::string>());
      }
      if (std::find(spec.members.begin(), spec.members.end(), spec.basic) == spec.members.end()) {
        throw Error(ErrorCode::schema, path + ".basic: '" + spec.basic + "' must be one of the members");
      }
      const std::string gran = detail::get_string(reuse[r], "granularity", path, "layer-wise");
      if (gran == "layer-wise") spec.granularity = Granularity::layer_wise;
      else if (gran == "block-wise") spec.granularity = Granularity::block_wise;
      else throw Error(ErrorCode::schema, path + ".granularity: expected layer-wise or block-wise");
      for (const auto& m : spec.members) {
        const bool found = spec.granularity == Granularity::layer_wise
                               ? net.find_layer(m).has_value()
                               : net.block_index(m) != NetworkDesc::npos;
        if (!found) {
          throw Error(ErrorCode::schema, path + ".members: unknown " +
                                             std::string(spec.granularity == Granularity::layer_wise ? "layer" : "block") +
                                             " '" + m + "'");
        }
      }
      if (reuse[r].contains("transforms")) {
        const auto& ts = reuse[r]["transforms"];
        if (!ts.is_array() || ts.size() != spec.members.size()) {
          throw Error(ErrorCode::schema, path + ".transforms: expected one transform per member");
        }
        for (std::size_t t = 0; t < ts.size(); ++t) {
          spec.transforms.push_back(parse_transform(ts[t], path + ".transforms[" + std::to_string(t) + "]"));
        }
      } else {
        spec.transforms.assign(spec.members.size(), ObuTransform::identity());
      }
      net.reuse.push_back(std::move(spec));
    }
  }
  resolve_network(net);  // shape and compatibility validation
  return net;
}

inline NetworkDesc parse_netdesc(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("$: malformed JSON: ") + e.what());
  }
  return parse_netdesc_json(j);
}

inline nlohmann::json to_json(const NetworkDesc& net) {
  nlohmann::json j;
  j["name"] = net.name;
  j["input"] = net.input_shape;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : net.blocks) {
    nlohmann::json jb;
    jb["name"] = b.name;
    jb["layers"] = nlohmann::json::array();
    for (const auto& l : b.layers) {
      nlohmann::json jl;
      jl["kind"] = to_string(l.kind);
      jl["name"] = l.name;
      if (l.kind == LayerKind::dense) { jl["in"] = l.in; jl["out"] = l.out; }
      if (l.kind == LayerKind::conv2d) {
        jl["cin"] = l.cin; jl["cout"] = l.cout; jl["k"] = l.k;
        jl["stride"] = l.stride; jl["pad"] = l.pad;
      }
      if (l.kind == LayerKind::norm) {
        jl["channels"] = l.channels; jl["scale"] = l.scale; jl["offset"] = l.offset;
      }
      jb["layers"].push_back(jl);
    }
    j["blocks"].push_back(jb);
  }
  j["reuse"] = nlohmann::json::array();
  for (const auto& r : net.reuse) {
    nlohmann::json jr;
    jr["basic"] = r.basic;
    jr["members"] = r.members;
    jr["granularity"] = to_string(r.granularity);
    jr["transforms"] = nlohmann::json::array();
    for (const auto& t : r.transforms) jr["transforms"].push_back(transform_to_json(t));
    j["reuse"].push_back(jr);
  }
  return j;
}

/// Trainable parameter count, counting each shared basic block once.
inline std::size_t parameter_count(const NetworkDesc& net) {
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const auto& rl : resolve_network(net)) {
    if (seen.insert(rl.param_name).second) n += net.layer(rl.param_name).parameter_count();
  }
  return n;
}

}  // namespace rnb

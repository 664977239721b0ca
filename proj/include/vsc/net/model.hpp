#pragma once

#include <span>
#include <string>

#include "vsc/geometry/types.hpp"
#include "vsc/net/graph.hpp"

namespace vsc::net {

// Architecture knobs. The full-scale preset is encoder 6 / decoder 8 blocks,
// 6 heads, 384 hidden dims, kNN 6 (features) and 8 (geometric attention),
// 2048 input points and 256 x 16 = 4096 output points; the desk preset shrinks
// every axis so gradient checks and CI training stay cheap.
struct ModelConfig {
  int encoder_depth = 6;
  int decoder_depth = 8;
  int num_heads = 6;
  int hidden_dim = 384;
  int knn_feature = 6;
  int knn_geom = 8;
  int n_input = 2048;
  int n_tokens = 256;
  int n_coarse = 256;
  int fold_factor = 16;
  std::string scale = "full";

  int n_output() const { return n_coarse * fold_factor; }
  void validate() const;

  static ModelConfig full_scale();
  static ModelConfig desk();

  std::string to_json_string() const;
  static ModelConfig from_json_string(const std::string& s);
  bool operator==(const ModelConfig&) const = default;
};

class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  int add(std::string name, Tensor value) {
    entries_.push_back({std::move(name), std::move(value)});
    return int(entries_.size()) - 1;
  }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::size_t count() const { return entries_.size(); }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

 private:
  std::vector<Entry> entries_;
};

// Parameter handles into a ParamStore / bound graph leaves.
struct LinearRef {
  int w = -1, b = -1;
};
struct AttnRef {
  LinearRef q, k, v, o;
};
struct BlockRef {
  AttnRef global, local;
  LinearRef merge;
  int ln1_g = -1, ln1_b = -1;
  LinearRef ffn1, ffn2;
  int ln2_g = -1, ln2_b = -1;
};
struct DecBlockRef {
  BlockRef self_block;
  AttnRef cross;
  int lnc_g = -1, lnc_b = -1;
};

struct LinearVals {
  Value w, b;
};
struct AttnVals {
  LinearVals q, k, v, o;
};

// --- building blocks, exposed for unit tests ---

Value linear(Graph& g, Value x, const LinearVals& p);

// Standard multi-head scaled dot-product attention with output projection.
// An additive mask (-inf blocks) restricts which keys each query sees.
Value mha(Graph& g, Value queries, Value keys_values, const AttnVals& p,
          int num_heads, const Tensor* additive_mask = nullptr);

// Max-aggregated edge MLP over a fixed neighbor graph:
// out_i = max_j leaky_relu(W [f_i ; f_j - f_i] + b).
Value edgeconv(Graph& g, Value features, const std::vector<std::vector<int>>& neighbors,
               const LinearVals& p, double negative_slope = 0.2);

// kNN graphs with self excluded, ties by lower index. k must be < n.
std::vector<std::vector<int>> knn_graph_points(std::span<const Vec3> pts, int k);
std::vector<std::vector<int>> knn_graph_features(const Tensor& feats, int k);

// Additive n x n attention mask opening each token's k nearest tokens
// (including itself) by coordinate distance.
Tensor local_attention_mask(std::span<const Vec3> coords, int k);

struct BlockVals {
  AttnVals global, local;
  LinearVals merge;
  Value ln1_g, ln1_b;
  LinearVals ffn1, ffn2;
  Value ln2_g, ln2_b;
};

// Global attention + kNN-restricted local attention over token coordinates,
// merged, with residual + layer norm around attention and feedforward.
Value geometry_aware_block(Graph& g, Value tokens, std::span<const Vec3> token_coords,
                           const BlockVals& p, int num_heads, int knn_geom);

// ---------------------------------------------------------------------------

class CompletionModel {
 public:
  CompletionModel(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }
  std::size_t param_count() const { return params_.scalar_count(); }

  struct Forward {
    Value output;  // n_output x 3 in normalized space
    Value coarse;  // n_coarse x 3 in normalized space
    Vec3 center;
    double scale = 1.0;
    std::vector<Value> bound;  // graph leaf per parameter entry
  };

  // Normalize about the centroid, tokenize, encode, generate adaptive
  // queries, decode, rebuild. partial must have exactly n_input points.
  Forward forward(Graph& g, const geom::PointCloud& partial, bool train_mode) const;

  // Full inference pass returning a denormalized cloud of n_output points.
  geom::PointCloud complete(const geom::PointCloud& partial) const;

 private:
  struct Refs;
  void init_params();
  LinearRef make_linear(const std::string& name, int in, int out, Rng& rng);
  AttnRef make_attn(const std::string& name, int dim, Rng& rng);
  BlockRef make_block(const std::string& name, int dim, Rng& rng);
  int make_ln(const std::string& name, int dim, double fill);

  ModelConfig cfg_;
  std::uint64_t seed_;
  ParamStore params_;

  LinearRef ec1_, ec2_, token_proj_;
  LinearRef pos_enc1_, pos_enc2_, pos_dec1_, pos_dec2_;
  std::vector<BlockRef> enc_blocks_;
  LinearRef gen_hidden_, gen_coarse_, gen_global_, gen_query_;
  std::vector<DecBlockRef> dec_blocks_;
  LinearRef reb1_, reb2_;
};

}  // namespace vsc::net

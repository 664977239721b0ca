#include "vsc/net/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vsc/spatial/kdtree.hpp"
#include "vsc/spatial/sampling.hpp"

namespace vsc::net {

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

void ModelConfig::validate() const {
  if (hidden_dim < 4 || hidden_dim % 4 != 0)
    fail(ErrorCategory::Config, "hidden_dim must be a positive multiple of 4");
  if (num_heads < 1 || hidden_dim % num_heads != 0)
    fail(ErrorCategory::Config, "hidden_dim must be divisible by num_heads");
  if (encoder_depth < 1 || decoder_depth < 1)
    fail(ErrorCategory::Config, "encoder/decoder depth must be >= 1");
  if (n_input < 2 || n_tokens < 1 || n_coarse < 1 || fold_factor < 1)
    fail(ErrorCategory::Config, "point counts must be positive");
  if (n_tokens > n_input)
    fail(ErrorCategory::Config, "n_tokens must be <= n_input");
  if (knn_feature < 1 || knn_feature >= n_input)
    fail(ErrorCategory::Config, "knn_feature must be in [1, n_input)");
  if (knn_geom < 1) fail(ErrorCategory::Config, "knn_geom must be >= 1");
  if (scale != "full" && scale != "desk")
    fail(ErrorCategory::Config, "scale must be \"full\" or \"desk\"");
}

ModelConfig ModelConfig::full_scale() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.encoder_depth = 2;
  c.decoder_depth = 2;
  c.num_heads = 4;
  c.hidden_dim = 32;
  c.knn_feature = 4;
  c.knn_geom = 4;
  c.n_input = 64;
  c.n_tokens = 16;
  c.n_coarse = 16;
  c.fold_factor = 4;
  c.scale = "desk";
  return c;
}

std::string ModelConfig::to_json_string() const {
  nlohmann::json j;
  j["encoder_depth"] = encoder_depth;
  j["decoder_depth"] = decoder_depth;
  j["num_heads"] = num_heads;
  j["hidden_dim"] = hidden_dim;
  j["knn_feature"] = knn_feature;
  j["knn_geom"] = knn_geom;
  j["n_input"] = n_input;
  j["n_tokens"] = n_tokens;
  j["n_coarse"] = n_coarse;
  j["fold_factor"] = fold_factor;
  j["scale"] = scale;
  return j.dump();
}

ModelConfig ModelConfig::from_json_string(const std::string& s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, std::string("model config: ") + e.what());
  }
  ModelConfig c;
  try {
    j.at("encoder_depth").get_to(c.encoder_depth);
    j.at("decoder_depth").get_to(c.decoder_depth);
    j.at("num_heads").get_to(c.num_heads);
    j.at("hidden_dim").get_to(c.hidden_dim);
    j.at("knn_feature").get_to(c.knn_feature);
    j.at("knn_geom").get_to(c.knn_geom);
    j.at("n_input").get_to(c.n_input);
    j.at("n_tokens").get_to(c.n_tokens);
    j.at("n_coarse").get_to(c.n_coarse);
    j.at("fold_factor").get_to(c.fold_factor);
    j.at("scale").get_to(c.scale);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::Format, std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// building blocks
// ---------------------------------------------------------------------------

Value linear(Graph& g, Value x, const LinearVals& p) {
  return g.add_rowvec(g.matmul(x, p.w), p.b);
}

namespace {

Value pos_mlp(Graph& g, Value coords, const LinearVals& l1, const LinearVals& l2) {
  return linear(g, g.gelu(linear(g, coords, l1)), l2);
}

}  // namespace

Value mha(Graph& g, Value queries, Value keys_values, const AttnVals& p,
          int num_heads, const Tensor* additive_mask) {
  const int d = g.value(queries).cols;
  if (d != g.value(keys_values).cols)
    fail(ErrorCategory::DimensionMismatch, "mha: query/key dim mismatch");
  if (num_heads < 1 || d % num_heads != 0)
    fail(ErrorCategory::DimensionMismatch, "mha: dim must divide num_heads");

  const Value q = linear(g, queries, p.q);
  const Value k = linear(g, keys_values, p.k);
  const Value v = linear(g, keys_values, p.v);
  const int dh = d / num_heads;
  const double inv_sqrt = 1.0 / std::sqrt(double(dh));

  Value heads_out;
  for (int h = 0; h < num_heads; ++h) {
    const int c0 = h * dh, c1 = (h + 1) * dh;
    const Value qh = g.slice_cols(q, c0, c1);
    const Value kh = g.slice_cols(k, c0, c1);
    const Value vh = g.slice_cols(v, c0, c1);
    const Value scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt);
    const Value attn = g.softmax_rows(scores, additive_mask);
    const Value oh = g.matmul(attn, vh);
    heads_out = h == 0 ? oh : g.concat_cols(heads_out, oh);
  }
  return linear(g, heads_out, p.o);
}

Value edgeconv(Graph& g, Value features, const std::vector<std::vector<int>>& neighbors,
               const LinearVals& p, double negative_slope) {
  const int n = g.value(features).rows;
  if (int(neighbors.size()) != n)
    fail(ErrorCategory::DimensionMismatch, "edgeconv: neighbor list size mismatch");
  const int k = neighbors.empty() ? 0 : int(neighbors[0].size());
  if (k < 1) fail(ErrorCategory::InvalidArgument, "edgeconv: empty neighborhoods");

  std::vector<int> center_idx, nbr_idx;
  center_idx.reserve(std::size_t(n) * k);
  nbr_idx.reserve(std::size_t(n) * k);
  for (int i = 0; i < n; ++i) {
    if (int(neighbors[i].size()) != k)
      fail(ErrorCategory::DimensionMismatch, "edgeconv: ragged neighbor lists");
    for (int j : neighbors[i]) {
      center_idx.push_back(i);
      nbr_idx.push_back(j);
    }
  }
  const Value fi = g.gather_rows(features, std::move(center_idx));
  const Value fj = g.gather_rows(features, std::move(nbr_idx));
  const Value edge = g.concat_cols(fi, g.sub(fj, fi));
  const Value h = g.leaky_relu(linear(g, edge, p), negative_slope);
  return g.group_max_rows(h, k);
}

std::vector<std::vector<int>> knn_graph_points(std::span<const Vec3> pts, int k) {
  const int n = int(pts.size());
  if (k < 1 || k >= n)
    fail(ErrorCategory::InvalidArgument, "knn_graph_points: need 1 <= k < n");
  const spatial::KdTree tree(pts);
  std::vector<std::vector<int>> out(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<spatial::Neighbor> nn;
    tree.knn(pts[i], k + 1, nn);
    auto& lst = out[i];
    lst.reserve(k);
    bool self_dropped = false;
    for (const auto& nb : nn) {
      if (!self_dropped && nb.index == i) {
        self_dropped = true;
        continue;
      }
      if (int(lst.size()) < k) lst.push_back(nb.index);
    }
    lst.resize(k);  // when self was not among the k+1 (duplicate points)
  }
  return out;
}

std::vector<std::vector<int>> knn_graph_features(const Tensor& feats, int k) {
  const int n = feats.rows;
  if (k < 1 || k >= n)
    fail(ErrorCategory::InvalidArgument, "knn_graph_features: need 1 <= k < n");
  std::vector<std::vector<int>> out(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0;
      for (int c = 0; c < feats.cols; ++c) {
        const double diff = feats.at(i, c) - feats.at(j, c);
        d += diff * diff;
      }
      dist.emplace_back(d, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& lst = out[i];
    lst.reserve(k);
    for (int j = 0; j < k; ++j) lst.push_back(dist[j].second);
  }
  return out;
}

Tensor local_attention_mask(std::span<const Vec3> coords, int k) {
  const int n = int(coords.size());
  const int k_eff = std::min(k, n);
  const spatial::KdTree tree(coords);
  Tensor mask =
      Tensor::full(n, n, -std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<spatial::Neighbor> nn;
    tree.knn(coords[i], k_eff, nn);
    for (const auto& nb : nn) mask.at(i, nb.index) = 0.0;
  }
  return mask;
}

Value geometry_aware_block(Graph& g, Value tokens, std::span<const Vec3> token_coords,
                           const BlockVals& p, int num_heads, int knn_geom) {
  if (int(token_coords.size()) != g.value(tokens).rows)
    fail(ErrorCategory::DimensionMismatch,
         "geometry_aware_block: coords/token rows mismatch");
  const Value global_out = mha(g, tokens, tokens, p.global, num_heads);
  const Tensor mask = local_attention_mask(token_coords, knn_geom);
  const Value local_out = mha(g, tokens, tokens, p.local, num_heads, &mask);
  const Value merged = linear(g, g.concat_cols(global_out, local_out), p.merge);
  const Value x = g.layer_norm(g.add(tokens, merged), p.ln1_g, p.ln1_b);
  const Value ff = linear(g, g.gelu(linear(g, x, p.ffn1)), p.ffn2);
  return g.layer_norm(g.add(x, ff), p.ln2_g, p.ln2_b);
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

CompletionModel::CompletionModel(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
  init_params();
}

LinearRef CompletionModel::make_linear(const std::string& name, int in, int out,
                                       Rng& rng) {
  Tensor w(in, out);
  const double bound = std::sqrt(6.0 / double(in + out));
  for (double& x : w.v) x = rng.uniform(-bound, bound);
  LinearRef r;
  r.w = params_.add(name + ".w", std::move(w));
  r.b = params_.add(name + ".b", Tensor::zeros(1, out));
  return r;
}

AttnRef CompletionModel::make_attn(const std::string& name, int dim, Rng& rng) {
  AttnRef r;
  r.q = make_linear(name + ".q", dim, dim, rng);
  r.k = make_linear(name + ".k", dim, dim, rng);
  r.v = make_linear(name + ".v", dim, dim, rng);
  r.o = make_linear(name + ".o", dim, dim, rng);
  return r;
}

int CompletionModel::make_ln(const std::string& name, int dim, double fill) {
  return params_.add(name, Tensor::full(1, dim, fill));
}

BlockRef CompletionModel::make_block(const std::string& name, int dim, Rng& rng) {
  BlockRef r;
  r.global = make_attn(name + ".global", dim, rng);
  r.local = make_attn(name + ".local", dim, rng);
  r.merge = make_linear(name + ".merge", 2 * dim, dim, rng);
  r.ln1_g = make_ln(name + ".ln1.g", dim, 1.0);
  r.ln1_b = make_ln(name + ".ln1.b", dim, 0.0);
  r.ffn1 = make_linear(name + ".ffn1", dim, 2 * dim, rng);
  r.ffn2 = make_linear(name + ".ffn2", 2 * dim, dim, rng);
  r.ln2_g = make_ln(name + ".ln2.g", dim, 1.0);
  r.ln2_b = make_ln(name + ".ln2.b", dim, 0.0);
  return r;
}

void CompletionModel::init_params() {
  Rng rng(seed_);
  const int d = cfg_.hidden_dim;
  const int d_quarter = d / 4, d_half = d / 2;

  ec1_ = make_linear("tok.ec1", 6, d_quarter, rng);
  ec2_ = make_linear("tok.ec2", 2 * d_quarter, d_half, rng);
  token_proj_ = make_linear("tok.proj", d_half, d, rng);
  pos_enc1_ = make_linear("pos.enc1", 3, d, rng);
  pos_enc2_ = make_linear("pos.enc2", d, d, rng);
  pos_dec1_ = make_linear("pos.dec1", 3, d, rng);
  pos_dec2_ = make_linear("pos.dec2", d, d, rng);

  enc_blocks_.clear();
  for (int i = 0; i < cfg_.encoder_depth; ++i)
    enc_blocks_.push_back(make_block("enc." + std::to_string(i), d, rng));

  gen_hidden_ = make_linear("gen.hidden", 2 * d, d, rng);
  gen_coarse_ = make_linear("gen.coarse", d, cfg_.n_coarse * 3, rng);
  gen_global_ = make_linear("gen.global", 2 * d, d, rng);
  gen_query_ = make_linear("gen.query", 3 + d, d, rng);

  dec_blocks_.clear();
  for (int i = 0; i < cfg_.decoder_depth; ++i) {
    DecBlockRef r;
    const std::string name = "dec." + std::to_string(i);
    r.self_block = make_block(name + ".self", d, rng);
    r.cross = make_attn(name + ".cross", d, rng);
    r.lnc_g = make_ln(name + ".lnc.g", d, 1.0);
    r.lnc_b = make_ln(name + ".lnc.b", d, 0.0);
    dec_blocks_.push_back(r);
  }

  reb1_ = make_linear("rebuild.1", d, d, rng);
  reb2_ = make_linear("rebuild.2", d, cfg_.fold_factor * 3, rng);
}

CompletionModel::Forward CompletionModel::forward(Graph& g,
                                                  const geom::PointCloud& partial,
                                                  bool train_mode) const {
  if (int(partial.size()) != cfg_.n_input)
    fail(ErrorCategory::InvalidArgument,
         "forward: partial cloud must have exactly n_input points (got " +
             std::to_string(partial.size()) + ", want " +
             std::to_string(cfg_.n_input) + ")");
  partial.validate();

  Forward f;
  f.center = partial.centroid();
  f.scale = partial.bbox_diagonal();
  if (f.scale <= 0) f.scale = 1.0;

  std::vector<Vec3> npts(partial.size());
  for (std::size_t i = 0; i < partial.size(); ++i)
    npts[i] = (partial.points[i] - f.center) / f.scale;

  f.bound.resize(params_.count());
  for (std::size_t i = 0; i < params_.count(); ++i)
    f.bound[i] = g.leaf(params_.entries()[i].value, train_mode);
  auto L = [&](const LinearRef& r) { return LinearVals{f.bound[r.w], f.bound[r.b]}; };
  auto A = [&](const AttnRef& r) { return AttnVals{L(r.q), L(r.k), L(r.v), L(r.o)}; };
  auto B = [&](const BlockRef& r) {
    return BlockVals{A(r.global),      A(r.local),       L(r.merge),
                     f.bound[r.ln1_g], f.bound[r.ln1_b], L(r.ffn1),
                     L(r.ffn2),        f.bound[r.ln2_g], f.bound[r.ln2_b]};
  };

  // Tokenizer: two EdgeConv stages (second on the dynamic feature graph),
  // farthest-point token centers, learned position embedding.
  const Value coords = g.constant(Tensor::from_points(npts));
  const auto nbr1 = knn_graph_points(npts, cfg_.knn_feature);
  const Value f1 = edgeconv(g, coords, nbr1, L(ec1_));
  const auto nbr2 = knn_graph_features(g.value(f1), cfg_.knn_feature);
  const Value f2 = edgeconv(g, f1, nbr2, L(ec2_));

  const auto token_idx_sz = spatial::fps_indices(npts, cfg_.n_tokens, seed_);
  std::vector<int> token_idx(token_idx_sz.begin(), token_idx_sz.end());
  std::vector<Vec3> token_coords(token_idx.size());
  for (std::size_t i = 0; i < token_idx.size(); ++i)
    token_coords[i] = npts[token_idx[i]];

  const Value token_feats = linear(g, g.gather_rows(f2, token_idx), L(token_proj_));
  const Value pos_e = pos_mlp(g, g.constant(Tensor::from_points(token_coords)),
                              L(pos_enc1_), L(pos_enc2_));
  Value x = g.add(token_feats, pos_e);

  for (const BlockRef& blk : enc_blocks_)
    x = geometry_aware_block(g, x, token_coords, B(blk), cfg_.num_heads,
                             cfg_.knn_geom);

  // Adaptive queries: coarse proposal centers and their features are predicted
  // from the pooled encoding, so queries follow the input.
  const Value pooled = g.concat_cols(g.max_rows(x), g.mean_rows(x));
  const Value gen_h = g.gelu(linear(g, pooled, L(gen_hidden_)));
  f.coarse = g.reshape(linear(g, gen_h, L(gen_coarse_)), cfg_.n_coarse, 3);
  const Value gen_g = g.gelu(linear(g, pooled, L(gen_global_)));
  const Value rep = g.repeat_rows(gen_g, cfg_.n_coarse);
  const Value qf = g.gelu(linear(g, g.concat_cols(f.coarse, rep), L(gen_query_)));

  const std::vector<Vec3> coarse_coords = g.value(f.coarse).to_points();
  Value xq = g.add(qf, pos_mlp(g, f.coarse, L(pos_dec1_), L(pos_dec2_)));

  for (const DecBlockRef& blk : dec_blocks_) {
    xq = geometry_aware_block(g, xq, coarse_coords, B(blk.self_block),
                              cfg_.num_heads, cfg_.knn_geom);
    const Value cross = mha(g, xq, x, A(blk.cross), cfg_.num_heads);
    xq = g.layer_norm(g.add(xq, cross), f.bound[blk.lnc_g], f.bound[blk.lnc_b]);
  }

  // Rebuild: every coarse center expands into fold_factor local offsets.
  const Value reb_h = g.gelu(linear(g, xq, L(reb1_)));
  const Value offsets =
      g.reshape(linear(g, reb_h, L(reb2_)), cfg_.n_output(), 3);
  std::vector<int> center_idx(std::size_t(cfg_.n_output()));
  for (int i = 0; i < cfg_.n_output(); ++i) center_idx[i] = i / cfg_.fold_factor;
  const Value centers = g.gather_rows(f.coarse, std::move(center_idx));
  f.output = g.add(centers, offsets);

  if (!g.value(f.output).finite())
    fail(ErrorCategory::Internal, "forward: non-finite model output");
  return f;
}

geom::PointCloud CompletionModel::complete(const geom::PointCloud& partial) const {
  Graph g;
  const Forward f = forward(g, partial, false);
  const Tensor& out = g.value(f.output);
  geom::PointCloud pc;
  pc.points.resize(out.rows);
  for (int i = 0; i < out.rows; ++i)
    pc.points[i] = out.row_vec3(i) * f.scale + f.center;
  return pc;
}

}  // namespace vsc::net

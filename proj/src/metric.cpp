#include "mcam/metric.hpp"

#include "mcam/errors.hpp"
#include "mcam/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcam {

namespace {

using ConstVec = Eigen::Map<const Eigen::VectorXd>;

double mean_l2_distance(const GaussianComponent& g1,
                        const GaussianComponent& g2) {
  return (ConstVec(g1.mean.data(), g1.mean.size()) -
          ConstVec(g2.mean.data(), g2.mean.size()))
      .norm();
}

std::vector<double> max_normalized_priors(const AppearanceMixture& m) {
  double max_prior = 0.0;
  for (const auto& c : m.components) max_prior = std::max(max_prior, c.prior);
  std::vector<double> out(m.components.size());
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    out[i] = m.components[i].prior / max_prior;
  }
  return out;
}

// Max-normalize each row in place, guarding an all-zero row.
void max_normalize_rows(Eigen::MatrixXd& m, double eps_guard) {
  for (Eigen::Index q = 0; q < m.rows(); ++q) {
    const double row_max = std::max(m.row(q).maxCoeff(), eps_guard);
    m.row(q) /= row_max;
  }
}

// Gaussian kernel with per-gallery-column statistics over the query set:
// beta = column min, gamma = range_factor * column range (guarded).
void accumulate_kernel_similarity(const Eigen::MatrixXd& dbar,
                                  const MetricConfig& cfg,
                                  Eigen::MatrixXd& sim) {
  for (Eigen::Index g = 0; g < dbar.cols(); ++g) {
    const double beta = dbar.col(g).minCoeff();
    const double range = dbar.col(g).maxCoeff() - beta;
    const double gamma =
        std::max(cfg.kernel_range_factor * range, cfg.eps_guard);
    for (Eigen::Index q = 0; q < dbar.rows(); ++q) {
      const double gap = dbar(q, g) - beta;
      sim(q, g) += std::exp(-gap * gap / gamma);
    }
  }
}

CrcsParts crcs_parts_for_gallery(const AppearanceMixture& mq,
                                 const std::vector<Eigen::VectorXd>& codes,
                                 int gallery_index,
                                 const ChannelDictionary& dict) {
  const auto [offset, count] = dict.gallery_spans[gallery_index];
  CrcsParts parts;
  for (std::size_t i = 0; i < mq.components.size(); ++i) {
    const GaussianComponent& comp = mq.components[i];
    const Eigen::VectorXd rho_g = codes[i].segment(offset, count);
    const double residual =
        (ConstVec(comp.mean.data(), comp.mean.size()) -
         dict.atoms.middleCols(offset, count) * rho_g)
            .norm();
    parts.residual += comp.prior * residual;
    parts.coding += comp.prior * rho_g.norm();
  }
  return parts;
}

std::vector<Eigen::VectorXd> encode_components(const AppearanceMixture& mq,
                                               const ChannelDictionary& dict) {
  std::vector<Eigen::VectorXd> codes;
  codes.reserve(mq.components.size());
  for (const auto& comp : mq.components) {
    codes.push_back(crc_encode(comp.mean, dict));
  }
  return codes;
}

}  // namespace

double riemannian_distance(const std::vector<double>& var1,
                           const std::vector<double>& var2) {
  if (var1.size() != var2.size()) {
    throw Error(ErrorCode::DimMismatch,
                "variance vectors differ in dimension");
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < var1.size(); ++p) {
    const double log_ratio = std::log(var1[p] / var2[p]);
    sum += log_ratio * log_ratio;
  }
  return std::sqrt(sum);
}

double lr_component_distance(const GaussianComponent& g1,
                             const GaussianComponent& g2, double alpha) {
  if (g1.dim() != g2.dim()) {
    throw Error(ErrorCode::DimMismatch, "components differ in dimension");
  }
  return (1.0 - alpha) * mean_l2_distance(g1, g2) +
         alpha * riemannian_distance(g1.var, g2.var);
}

double mixing_weight_alpha(double pi_i, double pi_j, int n_q, int n_g,
                           const MetricConfig& cfg) {
  const double alpha_max =
      std::min(cfg.a, static_cast<double>(std::min(n_q, n_g)) / cfg.b);
  return std::min(alpha_max, (pi_i + pi_j) / 2.0);
}

double lr_channel_distance(const AppearanceMixture& mq,
                           const AppearanceMixture& mg, int n_q, int n_g,
                           const MetricConfig& cfg) {
  if (mq.channel != mg.channel) {
    throw Error(ErrorCode::ChannelMismatch,
                "mixtures belong to different feature channels");
  }
  const std::vector<double> pi_q = max_normalized_priors(mq);
  const std::vector<double> pi_g = max_normalized_priors(mg);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mq.components.size(); ++i) {
    for (std::size_t j = 0; j < mg.components.size(); ++j) {
      const double alpha =
          mixing_weight_alpha(pi_q[i], pi_g[j], n_q, n_g, cfg);
      best = std::min(best, lr_component_distance(mq.components[i],
                                                  mg.components[j], alpha));
    }
  }
  return best;
}

ChannelDictionary build_channel_dictionary(
    const std::vector<McamSignature>& gallery, FeatureChannelId channel,
    double delta) {
  if (gallery.empty()) {
    throw Error(ErrorCode::EmptyGallery, "gallery set is empty");
  }

  ChannelDictionary dict;
  dict.channel = channel;
  dict.delta = delta;

  int n_atoms = 0;
  int dim = -1;
  for (const auto& sig : gallery) {
    const AppearanceMixture& m = sig.mixture(channel);
    n_atoms += m.component_count();
    for (const auto& comp : m.components) {
      if (dim < 0) dim = comp.dim();
      if (comp.dim() != dim) {
        throw Error(ErrorCode::DimMismatch,
                    "gallery mixtures differ in descriptor dimension");
      }
    }
  }

  dict.atoms.resize(dim, n_atoms);
  int col = 0;
  for (int g = 0; g < static_cast<int>(gallery.size()); ++g) {
    const AppearanceMixture& m = gallery[g].mixture(channel);
    dict.gallery_ids.push_back(gallery[g].track_id);
    dict.gallery_spans.emplace_back(col, m.component_count());
    for (int k = 0; k < m.component_count(); ++k, ++col) {
      dict.atoms.col(col) =
          ConstVec(m.components[k].mean.data(), dim);
      dict.atom_refs.push_back({g, k});
    }
  }

  Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;
  gram.diagonal().array() += delta;
  dict.ridge_operator = gram.ldlt().solve(dict.atoms.transpose());
  return dict;
}

Eigen::VectorXd crc_encode(const std::vector<double>& mean,
                           const ChannelDictionary& dict) {
  if (static_cast<Eigen::Index>(mean.size()) != dict.atoms.rows()) {
    throw Error(ErrorCode::DimMismatch,
                "mean dimension does not match dictionary atoms");
  }
  return dict.ridge_operator * ConstVec(mean.data(), mean.size());
}

CrcsParts crcs_channel_distance(const AppearanceMixture& mq, int gallery_index,
                                const ChannelDictionary& dict,
                                const MetricConfig& cfg) {
  (void)cfg;
  if (gallery_index < 0 ||
      gallery_index >= static_cast<int>(dict.gallery_spans.size())) {
    throw Error(ErrorCode::UnknownGallerySignature,
                "gallery index " + std::to_string(gallery_index) +
                    " not in dictionary");
  }
  if (mq.channel != dict.channel) {
    throw Error(ErrorCode::ChannelMismatch,
                "query mixture channel does not match dictionary channel");
  }
  const std::vector<Eigen::VectorXd> codes = encode_components(mq, dict);
  return crcs_parts_for_gallery(mq, codes, gallery_index, dict);
}

int SimilarityMatrix::query_index(const std::string& query_id) const {
  for (int i = 0; i < static_cast<int>(query_ids.size()); ++i) {
    if (query_ids[i] == query_id) return i;
  }
  throw Error(ErrorCode::UnknownQuery,
              "query '" + query_id + "' not in similarity matrix");
}

SimilarityMatrix similarity_matrix(const std::vector<McamSignature>& queries,
                                   const std::vector<McamSignature>& gallery,
                                   const std::vector<FeatureChannelId>& channels,
                                   const MetricConfig& cfg) {
  if (queries.empty()) {
    throw Error(ErrorCode::EmptySet, "query set is empty");
  }
  if (gallery.empty()) {
    throw Error(ErrorCode::EmptyGallery, "gallery set is empty");
  }
  const int nq = static_cast<int>(queries.size());
  const int ng = static_cast<int>(gallery.size());

  // Validate channels and dimensions up front; the parallel loops below
  // must not throw.
  for (FeatureChannelId channel : channels) {
    const int dim = gallery[0].mixture(channel).components.at(0).dim();
    for (const auto& sig : gallery) {
      for (const auto& comp : sig.mixture(channel).components) {
        if (comp.dim() != dim) {
          throw Error(ErrorCode::DimMismatch,
                      "gallery signatures differ in descriptor dimension");
        }
      }
    }
    for (const auto& sig : queries) {
      for (const auto& comp : sig.mixture(channel).components) {
        if (comp.dim() != dim) {
          throw Error(ErrorCode::DimMismatch,
                      "query signatures do not match gallery dimension");
        }
      }
    }
  }

  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(nq, ng);

  for (FeatureChannelId channel : channels) {
    // L2-Riemannian part.
    Eigen::MatrixXd dlr(nq, ng);
    parallel_indexed(nq, [&](int q) {
      const AppearanceMixture& mq = queries[q].mixture(channel);
      for (int g = 0; g < ng; ++g) {
        dlr(q, g) =
            lr_channel_distance(mq, gallery[g].mixture(channel),
                                queries[q].n_frames, gallery[g].n_frames, cfg);
      }
    });
    max_normalize_rows(dlr, cfg.eps_guard);
    accumulate_kernel_similarity(dlr, cfg, sim);

    // Collaborative-coding part.
    const ChannelDictionary dict =
        build_channel_dictionary(gallery, channel, cfg.delta);
    Eigen::MatrixXd residual(nq, ng);
    Eigen::MatrixXd coding(nq, ng);
    parallel_indexed(nq, [&](int q) {
      const AppearanceMixture& mq = queries[q].mixture(channel);
      const std::vector<Eigen::VectorXd> codes = encode_components(mq, dict);
      for (int g = 0; g < ng; ++g) {
        const CrcsParts parts = crcs_parts_for_gallery(mq, codes, g, dict);
        residual(q, g) = parts.residual;
        coding(q, g) = parts.coding;
      }
    });
    max_normalize_rows(residual, cfg.eps_guard);
    max_normalize_rows(coding, cfg.eps_guard);
    const Eigen::MatrixXd dcrcs =
        cfg.w_residual * residual - cfg.w_coding * coding;
    accumulate_kernel_similarity(dcrcs, cfg, sim);
  }

  SimilarityMatrix out;
  for (const auto& q : queries) out.query_ids.push_back(q.track_id);
  for (const auto& g : gallery) out.gallery_ids.push_back(g.track_id);
  out.values.resize(static_cast<std::size_t>(nq) * ng);
  for (int q = 0; q < nq; ++q) {
    for (int g = 0; g < ng; ++g) {
      out.at(q, g) = sim(q, g);
    }
  }
  return out;
}

std::vector<int> rank_gallery_indices(const SimilarityMatrix& sim, int row) {
  std::vector<int> order(sim.gallery_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sim.at(row, a) > sim.at(row, b);
  });
  return order;
}

std::vector<std::string> rank_gallery(const SimilarityMatrix& sim,
                                      const std::string& query_id) {
  const int row = sim.query_index(query_id);
  std::vector<std::string> out;
  for (int g : rank_gallery_indices(sim, row)) {
    out.push_back(sim.gallery_ids[g]);
  }
  return out;
}

}  // namespace mcam

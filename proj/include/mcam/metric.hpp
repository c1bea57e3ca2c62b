#pragma once

#include "mcam/mixture.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace mcam {

struct MetricConfig {
  double a = 0.33;                  // global cap on the covariance weight
  double b = 100.0;                 // slope of alpha_max in track length
  double delta = 1.0;               // ridge weight
  double w_residual = 0.55;         // CRCS residual combination weight
  double w_coding = 0.45;           // CRCS coding-norm combination weight
  double kernel_range_factor = 0.33;
  double eps_guard = 1e-12;         // zero-range / zero-max guard
};

// Riemannian metric between diagonal SPD matrices given as variance vectors:
// sqrt(sum_p log^2(var1_p / var2_p)).
double riemannian_distance(const std::vector<double>& var1,
                           const std::vector<double>& var2);

// (1-alpha) * ||mu1 - mu2||_2 + alpha * riemannian_distance(var1, var2).
double lr_component_distance(const GaussianComponent& g1,
                             const GaussianComponent& g2, double alpha);

// alpha_max = min(a, min(n_q, n_g)/b); alpha = min(alpha_max,
// (pi_i + pi_j)/2) with max-normalized priors.
double mixing_weight_alpha(double pi_i, double pi_j, int n_q, int n_g,
                           const MetricConfig& cfg);

// Minimum alpha-weighted distance over all component pairs.
double lr_channel_distance(const AppearanceMixture& mq,
                           const AppearanceMixture& mg, int n_q, int n_g,
                           const MetricConfig& cfg);

struct AtomRef {
  int gallery_index = 0;
  int component_index = 0;
};

// Gallery-wide CRC dictionary for one feature channel. Atom columns are the
// gallery component means in (gallery order, component order); the ridge
// operator (D^T D + delta I)^-1 D^T is precomputed once.
struct ChannelDictionary {
  FeatureChannelId channel = FeatureChannelId::Csh;
  double delta = 1.0;
  std::vector<std::string> gallery_ids;
  Eigen::MatrixXd atoms;                            // dim x n_atoms
  std::vector<AtomRef> atom_refs;                   // one per atom column
  std::vector<std::pair<int, int>> gallery_spans;   // (offset, count)
  Eigen::MatrixXd ridge_operator;                   // n_atoms x dim

  int atom_count() const { return static_cast<int>(atoms.cols()); }
};

ChannelDictionary build_channel_dictionary(
    const std::vector<McamSignature>& gallery, FeatureChannelId channel,
    double delta);

// Closed-form ridge coding of a mean vector against the full dictionary.
Eigen::VectorXd crc_encode(const std::vector<double>& mean,
                           const ChannelDictionary& dict);

// Residual and coding-norm parts of the CRCS distance between a query
// mixture and one gallery signature, each aggregated over query components
// with the query priors as weights. Combination happens at matrix level.
struct CrcsParts {
  double residual = 0.0;
  double coding = 0.0;
};

CrcsParts crcs_channel_distance(const AppearanceMixture& mq, int gallery_index,
                                const ChannelDictionary& dict,
                                const MetricConfig& cfg);

struct SimilarityMatrix {
  std::vector<std::string> query_ids;
  std::vector<std::string> gallery_ids;
  std::vector<double> values;  // row-major |Q| x |G|

  double at(int q, int g) const {
    return values[static_cast<std::size_t>(q) * gallery_ids.size() + g];
  }
  double& at(int q, int g) {
    return values[static_cast<std::size_t>(q) * gallery_ids.size() + g];
  }
  int query_index(const std::string& query_id) const;
};

// Combined similarity over the full query and gallery sets: per channel, the
// L2-Riemannian part and the CRC part are max-normalized per query row,
// turned into Gaussian-kernel similarities with per-gallery beta/gamma
// statistics over the query set, and summed.
SimilarityMatrix similarity_matrix(const std::vector<McamSignature>& queries,
                                   const std::vector<McamSignature>& gallery,
                                   const std::vector<FeatureChannelId>& channels,
                                   const MetricConfig& cfg);

// Gallery indices sorted by descending similarity for one query row; ties
// keep gallery order.
std::vector<int> rank_gallery_indices(const SimilarityMatrix& sim, int row);
std::vector<std::string> rank_gallery(const SimilarityMatrix& sim,
                                      const std::string& query_id);

}  // namespace mcam

#include "mcam/selftest.hpp"

#include "mcam/dcov.hpp"
#include "mcam/errors.hpp"
#include "mcam/evaluation.hpp"
#include "mcam/features.hpp"
#include "mcam/metric.hpp"
#include "mcam/mixture.hpp"
#include "mcam/preprocess.hpp"
#include "mcam/region.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace mcam {

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw CheckFailure(what);
}

void expect_near(double actual, double wanted, double tol,
                 const std::string& what) {
  if (!(std::abs(actual - wanted) <= tol)) {
    std::ostringstream ss;
    ss << what << ": got " << actual << ", wanted " << wanted << " +-" << tol;
    throw CheckFailure(ss.str());
  }
}

AppearanceMixture single_component_mixture(FeatureChannelId channel,
                                           std::vector<double> mean,
                                           std::vector<double> var,
                                           double prior = 1.0) {
  AppearanceMixture m;
  m.channel = channel;
  m.components.push_back({prior, std::move(mean), std::move(var)});
  return m;
}

// ---- imaging ----

void check_region_grid() {
  expect(build_region_layout(64, 192, 32, 32, 16).count() == 33,
         "default layout must have 33 regions");
  expect(build_region_layout(32, 32, 32, 32, 16).count() == 1,
         "exact-fit layout must have 1 region");
  expect(build_region_layout(64, 64, 32, 32, 32).count() == 4,
         "non-overlapping 64x64 layout must have 4 regions");
}

void check_preprocess_constant() {
  const RegionLayout layout = default_region_layout();
  const Image gray = make_image(10, 10, 0.5, 0.5, 0.5);
  const NormalizedFrame frame = preprocess_frame(gray, layout);
  expect(frame.width == 64 && frame.height == 192,
         "output must be exactly 64x192");
  const double l0 = frame.lab[0];
  for (int i = 0; i < frame.width * frame.height; ++i) {
    expect_near(frame.lab[3 * i], l0, 1e-12, "constant input stays constant");
    expect_near(frame.lab[3 * i + 1], 0.0, 1e-6, "a stays ~0 for gray");
    expect_near(frame.lab[3 * i + 2], 0.0, 1e-6, "b stays ~0 for gray");
  }
}

void check_equalization_two_level() {
  // 50% at range min, 50% at range max: CDF mapping sends the two levels to
  // 0.5 and 1.0 of the range.
  std::vector<double> values(100, 0.0);
  for (int i = 50; i < 100; ++i) values[i] = 100.0;
  equalize_histogram(values, 0.0, 100.0);
  for (int i = 0; i < 50; ++i) {
    expect_near(values[i], 50.0, 1e-12, "lower level maps to 0.5 range");
  }
  for (int i = 50; i < 100; ++i) {
    expect_near(values[i], 100.0, 1e-12, "upper level maps to full range");
  }
}

// ---- features ----

void check_csh() {
  const RegionLayout layout = default_region_layout();
  const Image teal = make_image(64, 192, 0.1, 0.6, 0.6);
  const NormalizedFrame frame = preprocess_frame(teal, layout);
  const FeatureDescriptor d = extract_csh(frame, layout);
  expect(d.dim() == 33 * 90, "CSH dim must be 2970");
  // Constant color: per region and channel exactly one occupied bin.
  for (int region = 0; region < layout.count(); ++region) {
    for (int ch = 0; ch < 3; ++ch) {
      double sum = 0.0;
      int occupied = 0;
      for (int b = 0; b < kCshBins; ++b) {
        const double v = d.values[region * 90 + ch * kCshBins + b];
        sum += v;
        if (v > 0.0) ++occupied;
      }
      expect_near(sum, 1.0, 1e-9, "CSH histogram sums to 1");
      expect(occupied == 1, "constant color occupies exactly one bin");
    }
  }
}

void check_hog() {
  const RegionLayout layout = build_region_layout(32, 32, 32, 32, 16);
  NormalizedFrame frame;
  frame.width = 32;
  frame.height = 32;
  frame.lab.assign(32 * 32 * 3, 0.0);
  frame.rgb.assign(32 * 32 * 3, 0.0);
  // Vertical step edge: left half dark, right half bright.
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      frame.lab[3 * (y * 32 + x)] = x < 16 ? 10.0 : 90.0;
    }
  }
  const FeatureDescriptor d = extract_hog(frame, layout);
  expect(d.dim() == kHogBins, "single-region HOG dim");
  double sum = 0.0;
  for (double v : d.values) sum += v;
  expect_near(sum, 1.0, 1e-9, "HOG block L1 norm 1");
  expect_near(d.values[0], 1.0, 1e-9, "step edge votes only orientation 0");

  const FeatureDescriptor dims =
      extract_hog(preprocess_frame(make_image(8, 8, 0.3, 0.3, 0.3),
                                   default_region_layout()),
                  default_region_layout());
  expect(dims.dim() == 33 * 8, "HOG dim must be 264");
  for (double v : dims.values) {
    expect(v == 0.0, "constant frame gives all-zero HOG");
  }
}

void check_bcov() {
  const RegionLayout layout = default_region_layout();
  const NormalizedFrame frame =
      preprocess_frame(make_image(20, 60, 0.4, 0.5, 0.6), layout);
  const FeatureDescriptor d = extract_bcov(frame, layout);
  expect(d.dim() == 33 * 66, "BCov dim must be 2178");

  // All-constant channel stack: dCov is ~0, loading makes it eps*I, so the
  // log is log(eps)*I.
  Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(kBcovChannels, 50) * 0.25;
  Eigen::MatrixXd dcov = distance_covariance_matrix(constant);
  expect_near(dcov.norm(), 0.0, 1e-12, "constant channels have zero dCov");
  const double eps = spd_loading(dcov);
  expect(eps > 0.0, "loading stays positive for zero trace");
  dcov.diagonal().array() += eps;
  const Eigen::MatrixXd logm = spd_log(dcov);
  for (int i = 0; i < kBcovChannels; ++i) {
    for (int j = 0; j < kBcovChannels; ++j) {
      expect_near(logm(i, j), i == j ? std::log(eps) : 0.0, 1e-9,
                  "log of eps*I");
    }
  }
}

// ---- mixture ----

void check_kmeans() {
  DescriptorSet repeated(10, {3.0, -1.0});
  const ClusteringResult r1 = kmeans_cluster(repeated, 1, 7);
  expect_near(r1.centroids[0][0], 3.0, 1e-12, "centroid of repeated point");
  expect_near(r1.distortion_sum, 0.0, 1e-12, "zero distortion");

  DescriptorSet split = {{0.0}, {0.0}, {0.0}, {100.0}, {100.0}, {100.0}};
  const ClusteringResult r2 = kmeans_cluster(split, 2, 3);
  const double lo = std::min(r2.centroids[0][0], r2.centroids[1][0]);
  const double hi = std::max(r2.centroids[0][0], r2.centroids[1][0]);
  expect_near(lo, 0.0, 1e-12, "separable cluster centroid 0");
  expect_near(hi, 100.0, 1e-12, "separable cluster centroid 100");
  expect_near(r2.distortion_sum, 0.0, 1e-12, "separable distortion 0");
}

void check_distortion() {
  ClusteringResult r;
  r.centroids = {{1.0}};
  r.assignment = {0, 0};
  r.distortion_sum = 2.0;  // |0-1| + |2-1|
  expect_near(distortion_J(r, 1), 2.0, 1e-12, "J for S={0,2}, K=1");

  ClusteringResult r2;
  r2.centroids = {{1.0}, {11.0}};
  r2.assignment = {0, 0, 1, 1};
  r2.distortion_sum = 4.0;  // 1+1+1+1
  expect_near(distortion_J(r2, 2), 2.0, 1e-12, "J for two pairs, K=2");
}

void check_model_selection() {
  DescriptorSet identical(12, {5.0, 5.0});
  expect(select_component_count(identical, 5, 11) == 1,
         "identical descriptors select K=1");

  DescriptorSet two_clusters;
  for (int i = 0; i < 20; ++i) {
    two_clusters.push_back({0.0 + 0.1 * (i % 3 - 1)});
    two_clusters.push_back({100.0 + 0.1 * (i % 3 - 1)});
  }
  expect(select_component_count(two_clusters, 5, 11) == 2,
         "two tight far-apart clusters select K=2");

  expect(component_count_cap(30) == 5, "K_max(30) = max(5,3) = 5");
  expect(component_count_cap(80) == 8, "K_max(80) = 8");
}

void check_fit_mixture() {
  DescriptorSet one = {{1.0, 2.0}};
  const AppearanceMixture m = fit_mixture(one, FeatureChannelId::Hog, 1, 5);
  expect(m.component_count() == 1, "single frame yields K=1");
  expect_near(m.components[0].prior, 1.0, 1e-12, "prior 1");
  for (double v : m.components[0].var) {
    expect_near(v, kVarianceFloor, 1e-18, "singleton variance on the floor");
  }

  DescriptorSet bimodal;
  for (int i = 0; i < 30; ++i) bimodal.push_back({10.0 + 0.01 * (i % 2)});
  for (int i = 0; i < 5; ++i) bimodal.push_back({-40.0 + 0.01 * (i % 2)});
  const AppearanceMixture m2 =
      fit_mixture(bimodal, FeatureChannelId::Hog, 35, 17);
  expect(m2.component_count() == 2, "two-mode set yields K=2");
  expect_near(m2.components[0].prior, 30.0 / 35.0, 1e-9, "major prior 6/7");
  expect_near(m2.components[1].prior, 5.0 / 35.0, 1e-9, "minor prior 1/7");
  double prior_sum = 0.0;
  for (const auto& c : m2.components) prior_sum += c.prior;
  expect_near(prior_sum, 1.0, 1e-12, "priors sum to 1");
}

// ---- metric ----

void check_riemannian() {
  const std::vector<double> v1 = {4.0, 9.0};
  expect_near(riemannian_distance(v1, v1), 0.0, 1e-15, "d(A,A) = 0");

  const double e2 = std::exp(2.0);
  expect_near(riemannian_distance({e2, 1.0}, {1.0, 1.0}), 2.0, 1e-12,
              "diag(e^2,1) vs I");
  const double expected =
      std::sqrt(std::log(4.0) * std::log(4.0) + std::log(9.0) * std::log(9.0));
  expect_near(riemannian_distance({4.0, 9.0}, {1.0, 1.0}), expected, 1e-12,
              "diag(4,9) vs I");
  expect_near(expected, 2.5980, 5e-4, "literature value 2.5980");
}

void check_lr_component() {
  GaussianComponent g1{0.5, {0.0, 0.0}, {1.0, 1.0}};
  GaussianComponent g2{0.5, {3.0, 0.0}, {1.0, 1.0}};
  expect_near(lr_component_distance(g1, g2, 0.0), 3.0, 1e-12,
              "alpha=0 gives the mean distance");
  expect_near(lr_component_distance(g1, g2, 1.0), 0.0, 1e-12,
              "alpha=1 with equal variances gives 0");

  GaussianComponent g3{0.5, {0.0, 0.0}, {1.0, 1.0}};
  GaussianComponent g4{0.5, {3.0, 0.0}, {std::exp(2.0), 1.0}};
  expect_near(lr_component_distance(g3, g4, 0.33), 0.67 * 3.0 + 0.33 * 2.0,
              1e-12, "0.67*3 + 0.33*2 = 2.67");
}

void check_alpha() {
  MetricConfig cfg;
  expect_near(mixing_weight_alpha(1.0, 1.0, 1000, 1000, cfg), 0.33, 1e-12,
              "long tracks saturate at a=0.33");
  expect_near(mixing_weight_alpha(0.5, 0.5, 10, 1000, cfg), 0.1, 1e-12,
              "N=10 caps alpha at 0.1");
  expect_near(mixing_weight_alpha(0.2, 0.4, 1000, 1000, cfg), 0.3, 1e-12,
              "prior average 0.3 below the cap");
}

void check_lr_channel() {
  MetricConfig cfg;
  AppearanceMixture m;
  m.channel = FeatureChannelId::Csh;
  m.components.push_back({0.6, {0.0}, {1.0}});
  m.components.push_back({0.4, {10.0}, {2.0}});
  expect_near(lr_channel_distance(m, m, 50, 50, cfg), 0.0, 1e-12,
              "mixture vs itself is 0");

  AppearanceMixture g = single_component_mixture(FeatureChannelId::Csh,
                                                 {10.1}, {2.0});
  // Short tracks force alpha ~ 0: best pair is (10, 10.1).
  const double d = lr_channel_distance(m, g, 1, 1, cfg);
  expect_near(d, 0.1, 0.02, "best pair wins");

  AppearanceMixture q1 = single_component_mixture(FeatureChannelId::Csh,
                                                  {1.0}, {1.0});
  AppearanceMixture g1 = single_component_mixture(FeatureChannelId::Csh,
                                                  {4.0}, {4.0});
  const double alpha = mixing_weight_alpha(1.0, 1.0, 200, 200, cfg);
  expect_near(lr_channel_distance(q1, g1, 200, 200, cfg),
              lr_component_distance(q1.components[0], g1.components[0], alpha),
              1e-12, "K=1 equals the component distance at alpha_max");
}

void check_dictionary_and_encode() {
  std::vector<McamSignature> gallery(2);
  gallery[0].track_id = "g0";
  gallery[0].n_frames = 10;
  AppearanceMixture m0;
  m0.channel = FeatureChannelId::Hog;
  m0.components = {{0.5, {1.0, 0.0}, {1.0, 1.0}},
                   {0.3, {0.0, 1.0}, {1.0, 1.0}},
                   {0.2, {1.0, 1.0}, {1.0, 1.0}}};
  gallery[0].mixtures.push_back(m0);
  gallery[1].track_id = "g1";
  gallery[1].n_frames = 10;
  AppearanceMixture m1;
  m1.channel = FeatureChannelId::Hog;
  m1.components = {{0.7, {2.0, 0.0}, {1.0, 1.0}},
                   {0.3, {0.0, 2.0}, {1.0, 1.0}}};
  gallery[1].mixtures.push_back(m1);

  const ChannelDictionary dict =
      build_channel_dictionary(gallery, FeatureChannelId::Hog, 1.0);
  expect(dict.atom_count() == 5, "K=3 plus K=2 gives 5 atoms");

  // Identity atoms with delta=1: operator is I/2, so mu=(2,0) encodes (1,0).
  std::vector<McamSignature> id_gallery(1);
  id_gallery[0].track_id = "i";
  id_gallery[0].n_frames = 1;
  AppearanceMixture mi;
  mi.channel = FeatureChannelId::Hog;
  mi.components = {{0.5, {1.0, 0.0}, {1.0, 1.0}},
                   {0.5, {0.0, 1.0}, {1.0, 1.0}}};
  id_gallery[0].mixtures.push_back(mi);
  const ChannelDictionary id_dict =
      build_channel_dictionary(id_gallery, FeatureChannelId::Hog, 1.0);
  const Eigen::VectorXd rho = crc_encode({2.0, 0.0}, id_dict);
  expect_near(rho(0), 1.0, 1e-12, "identity-atom coding (1,0) first");
  expect_near(rho(1), 0.0, 1e-12, "identity-atom coding (1,0) second");

  // Single atom d=(1,0): rho = 1/(1+1) = 0.5.
  std::vector<McamSignature> single(1);
  single[0].track_id = "s";
  single[0].n_frames = 1;
  single[0].mixtures.push_back(single_component_mixture(
      FeatureChannelId::Hog, {1.0, 0.0}, {1.0, 1.0}));
  const ChannelDictionary sdict =
      build_channel_dictionary(single, FeatureChannelId::Hog, 1.0);
  expect_near(crc_encode({1.0, 0.0}, sdict)(0), 0.5, 1e-12,
              "single-atom coding 0.5");
}

void check_crcs_parts() {
  MetricConfig cfg;
  // Query aligned with g0's atom, orthogonal to g1's atom.
  std::vector<McamSignature> gallery(2);
  gallery[0].track_id = "g0";
  gallery[0].n_frames = 5;
  gallery[0].mixtures.push_back(single_component_mixture(
      FeatureChannelId::Hog, {1.0, 0.0}, {1.0, 1.0}));
  gallery[1].track_id = "g1";
  gallery[1].n_frames = 5;
  gallery[1].mixtures.push_back(single_component_mixture(
      FeatureChannelId::Hog, {0.0, 1.0}, {1.0, 1.0}));
  const ChannelDictionary dict =
      build_channel_dictionary(gallery, FeatureChannelId::Hog, 1.0);

  AppearanceMixture q = single_component_mixture(FeatureChannelId::Hog,
                                                 {1.0, 0.0}, {1.0, 1.0});
  const CrcsParts own = crcs_channel_distance(q, 0, dict, cfg);
  const CrcsParts other = crcs_channel_distance(q, 1, dict, cfg);
  expect(own.residual < other.residual, "aligned gallery has lower residual");
  expect(own.coding > other.coding, "aligned gallery takes the coding mass");
  // Orthogonal block gets rho=0: residual is the full mean norm, coding 0.
  expect_near(other.residual, 1.0, 1e-12, "orthogonal residual = ||mu||");
  expect_near(other.coding, 0.0, 1e-12, "orthogonal coding = 0");
}

void check_ranking() {
  SimilarityMatrix sim;
  sim.query_ids = {"q"};
  sim.gallery_ids = {"a", "b", "c"};
  sim.values = {0.2, 0.9, 0.5};
  const auto ranked = rank_gallery(sim, "q");
  expect(ranked[0] == "b" && ranked[1] == "c" && ranked[2] == "a",
         "(0.2,0.9,0.5) ranks (2nd,3rd,1st)");

  SimilarityMatrix tie;
  tie.query_ids = {"q"};
  tie.gallery_ids = {"a", "b", "c"};
  tie.values = {1.0, 1.0, 1.0};
  const auto tied = rank_gallery(tie, "q");
  expect(tied[0] == "a" && tied[1] == "b" && tied[2] == "c",
         "all-equal row keeps gallery order");
}

void check_cmc_identity() {
  SimilarityMatrix sim;
  sim.query_ids = {"q0", "q1"};
  sim.gallery_ids = {"g0", "g1"};
  sim.values = {1.0, 0.1, 0.1, 1.0};
  const CmcCurve curve = cmc_curve(sim, {"A", "B"}, {"A", "B"});
  expect_near(curve.rank(1), 1.0, 1e-12, "Q=G gives rank-1 = 1.0");

  bool threw = false;
  try {
    cmc_curve(sim, {"A", "Z"}, {"A", "B"});
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::MissingTruth;
  }
  expect(threw, "absent query person raises MissingTruth");
}

void check_synthetic_counts() {
  SyntheticSpec spec;
  spec.identities = 50;
  spec.cameras = 2;
  spec.frames_per_track = 3;
  spec.modes_per_identity = 1;
  spec.noise = 0.0;
  const auto tracks = generate_synthetic_tracks(spec, 9);
  expect(tracks.size() == 100, "50 identities x 2 cameras = 100 tracks");

  SyntheticSpec still;
  still.identities = 1;
  still.cameras = 1;
  still.frames_per_track = 4;
  still.modes_per_identity = 1;
  still.noise = 0.0;
  const auto quiet = generate_synthetic_tracks(still, 9);
  for (int f = 1; f < quiet[0].length(); ++f) {
    expect(quiet[0].frames[f].data == quiet[0].frames[0].data,
           "modes=1, noise=0 renders identical frames");
  }
}

}  // namespace

std::vector<SelfTestResult> run_selftest() {
  const std::pair<const char*, std::function<void()>> cases[] = {
      {"region grid counts", check_region_grid},
      {"preprocess constant input", check_preprocess_constant},
      {"equalization two-level CDF", check_equalization_two_level},
      {"CSH histograms", check_csh},
      {"HOG step edge", check_hog},
      {"BCov dimensions and degenerate log", check_bcov},
      {"kmeans separable clusters", check_kmeans},
      {"distortion J", check_distortion},
      {"component count selection", check_model_selection},
      {"mixture fitting", check_fit_mixture},
      {"riemannian distance", check_riemannian},
      {"alpha-weighted component distance", check_lr_component},
      {"mixing weight alpha", check_alpha},
      {"LR channel distance", check_lr_channel},
      {"CRC dictionary and encoding", check_dictionary_and_encode},
      {"CRCS residual and coding parts", check_crcs_parts},
      {"gallery ranking", check_ranking},
      {"CMC identity and missing truth", check_cmc_identity},
      {"synthetic generator counts", check_synthetic_counts},
  };

  std::vector<SelfTestResult> results;
  for (const auto& [name, fn] : cases) {
    SelfTestResult r;
    r.name = name;
    try {
      fn();
      r.passed = true;
    } catch (const std::exception& e) {
      r.passed = false;
      r.message = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace mcam

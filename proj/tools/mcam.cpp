// Command-line front end for the MCAM re-identification pipeline.
// Progress goes to stderr; results go to stdout or files so output stays
// pipeable. Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure.

#include "mcam/errors.hpp"
#include "mcam/evaluation.hpp"
#include "mcam/parallel.hpp"
#include "mcam/persistence.hpp"
#include "mcam/selftest.hpp"

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdio>
#include <iostream>
#include <map>
#include <set>

namespace {

using namespace mcam;

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void load_config_file(const std::string& path, RuntimeConfig& cfg) {
  if (!path.empty()) {
    apply_config(load_key_value_config(path), cfg);
  } else {
    apply_config({}, cfg);  // still honors MCAM_DATASET_ROOT
  }
}

std::vector<McamSignature> build_all_signatures(const DatasetIndex& index,
                                                const PipelineOptions& pipeline) {
  std::vector<McamSignature> signatures(index.entries.size());
  parallel_indexed(static_cast<int>(index.entries.size()), [&](int i) {
    const PersonTrack track = load_track(index.entries[i]);
    signatures[i] =
        build_signature(track, pipeline.channels, pipeline.layout,
                        pipeline.seed);
  });
  return signatures;
}

int cmd_ingest(const std::string& root) {
  const DatasetIndex index = ingest_dataset(root);
  for (const auto& w : index.warnings) std::cerr << "warning: " << w << "\n";

  std::map<std::string, int> tracks_per_camera;
  std::set<std::string> persons;
  long frames = 0;
  for (const auto& e : index.entries) {
    ++tracks_per_camera[e.camera_id];
    persons.insert(e.person_id);
    frames += e.length();
  }
  std::cout << "root " << index.root.string() << "\n";
  std::cout << "cameras " << tracks_per_camera.size() << "\n";
  std::cout << "persons " << persons.size() << "\n";
  std::cout << "tracks " << index.entries.size() << "\n";
  std::cout << "frames " << frames << "\n";
  for (const auto& [cam, count] : tracks_per_camera) {
    std::cout << "camera " << cam << " tracks " << count << "\n";
  }
  return 0;
}

int cmd_signatures(const std::string& root, const std::string& out,
                   const RuntimeConfig& cfg) {
  const DatasetIndex index = ingest_dataset(root);
  for (const auto& w : index.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "building signatures for " << index.entries.size()
            << " tracks (" << channel_list_to_string(cfg.pipeline.channels)
            << ")\n";
  const auto signatures = build_all_signatures(index, cfg.pipeline);
  save_signatures(out, signatures, config_hash(cfg.pipeline));
  std::cerr << "wrote " << signatures.size() << " signatures to " << out
            << "\n";
  return 0;
}

int cmd_match(const std::string& query_path, const std::string& gallery_path,
              const std::string& out, const RuntimeConfig& cfg) {
  const SignatureFile queries = load_signatures(query_path);
  const SignatureFile gallery = load_signatures(gallery_path);
  if (queries.config_hash != gallery.config_hash) {
    throw Error(ErrorCode::VersionMismatch,
                "query and gallery signature files were built with different "
                "pipeline configurations");
  }
  std::vector<FeatureChannelId> channels;
  for (const auto& m : queries.signatures.at(0).mixtures) {
    channels.push_back(m.channel);
  }
  const SimilarityMatrix sim = similarity_matrix(
      queries.signatures, gallery.signatures, channels, cfg.pipeline.metric);
  write_similarity_results(out, sim);
  std::cerr << "wrote " << sim.query_ids.size() << "x"
            << sim.gallery_ids.size() << " similarity matrix to " << out
            << "\n";
  return 0;
}

void print_rank_table(const ProtocolResult& result) {
  std::printf("%-8s %6s %6s %6s %6s\n", "", "r=1", "r=5", "r=10", "r=20");
  std::printf("%-8s %6.1f %6.1f %6.1f %6.1f\n", "MCAM",
              100.0 * result.averaged.rank(1), 100.0 * result.averaged.rank(5),
              100.0 * result.averaged.rank(10),
              100.0 * result.averaged.rank(20));
}

int cmd_eval(const std::string& mode, const std::string& root,
             const std::string& out, RuntimeConfig cfg) {
  if (mode == "pairwise") {
    cfg.protocol.mode = ProtocolMode::PairwiseCameras;
  } else if (mode == "split") {
    cfg.protocol.mode = ProtocolMode::RandomHalfSplit;
  } else if (mode == "fixed") {
    cfg.protocol.mode = ProtocolMode::FixedSets;
  } else {
    throw Error(ErrorCode::InvalidConfig,
                "mode must be pairwise, split, or fixed");
  }
  std::string dataset_root = root.empty() ? cfg.dataset_root : root;
  if (dataset_root.empty()) {
    throw Error(ErrorCode::DatasetNotFound,
                "no dataset root given (flag, config, or MCAM_DATASET_ROOT)");
  }

  const DatasetIndex index = ingest_dataset(dataset_root);
  for (const auto& w : index.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "building signatures for " << index.entries.size()
            << " tracks\n";
  const auto signatures = build_all_signatures(index, cfg.pipeline);

  std::map<std::string, std::string> person_of;
  for (const auto& e : index.entries) person_of[e.track_id] = e.person_id;

  const ProtocolResult result =
      run_protocol(cfg.protocol, cfg.pipeline.metric, cfg.pipeline.channels,
                   signatures, person_of);
  print_rank_table(result);
  if (!out.empty()) {
    write_cmc_table(out, result);
    std::cerr << "wrote CMC curve to " << out << "\n";
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out,
              RuntimeConfig cfg) {
  if (!spec_path.empty()) {
    apply_config(load_key_value_config(spec_path), cfg);
  }
  const auto tracks = generate_synthetic_tracks(cfg.synth, cfg.pipeline.seed);
  save_dataset(out, tracks);
  std::cerr << "wrote " << tracks.size() << " synthetic tracks under " << out
            << "\n";
  return 0;
}

int cmd_selftest() {
  const auto results = run_selftest();
  int failed = 0;
  for (const auto& r : results) {
    if (r.passed) {
      std::cout << "[PASS] " << r.name << "\n";
    } else {
      ++failed;
      std::cout << "[FAIL] " << r.name << ": " << r.message << "\n";
    }
  }
  std::cout << (failed == 0 ? "selftest OK (" : "selftest FAILED (")
            << (results.size() - failed) << "/" << results.size()
            << " passed)\n";
  return failed == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MCAM multi-shot person re-identification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string features;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--threads", threads, "worker thread cap (default: cores)");
  app.add_option("--seed", seed, "pipeline RNG seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--features", features,
                 "feature channels, e.g. csh,hog,bcov");

  auto* ingest = app.add_subcommand("ingest", "index a dataset directory");
  std::string ingest_root;
  ingest->add_option("root", ingest_root, "dataset root")->required();

  auto* signatures =
      app.add_subcommand("signatures", "build and save track signatures");
  std::string sig_root, sig_out;
  signatures->add_option("root", sig_root, "dataset root")->required();
  signatures->add_option("--out", sig_out, "output signature file")
      ->required();

  auto* match = app.add_subcommand("match", "rank gallery against queries");
  std::string match_query, match_gallery, match_out;
  match->add_option("--query", match_query, "query signature file")
      ->required();
  match->add_option("--gallery", match_gallery, "gallery signature file")
      ->required();
  match->add_option("--out", match_out, "results file")->required();

  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  std::string eval_mode = "split", eval_root, eval_out;
  int eval_trials = -1;
  int eval_min_len = -1;
  std::string eval_qcam, eval_gcam;
  eval->add_option("--mode", eval_mode, "pairwise | split | fixed");
  eval->add_option("--root", eval_root, "dataset root");
  eval->add_option("--trials", eval_trials, "number of trials");
  eval->add_option("--min-track-length", eval_min_len,
                   "drop tracks shorter than this");
  eval->add_option("--query-cam", eval_qcam, "query camera id");
  eval->add_option("--gallery-cam", eval_gcam, "gallery camera id");
  eval->add_option("--out", eval_out, "CMC curve output file");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  std::string synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "synthetic spec config file");
  synth->add_option("--out", synth_out, "output dataset root")->required();

  auto* selftest =
      app.add_subcommand("selftest", "run the analytic example suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RuntimeConfig cfg;
    load_config_file(config_path, cfg);
    if (threads > 0) cfg.threads = threads;
    if (seed_given) {
      cfg.pipeline.seed = seed;
      cfg.protocol.seed = seed;
    }
    if (!features.empty()) {
      cfg.pipeline.channels = parse_channel_list(features);
    }
    set_thread_count(cfg.threads);

    if (app.got_subcommand(ingest)) return cmd_ingest(ingest_root);
    if (app.got_subcommand(signatures)) {
      return cmd_signatures(sig_root, sig_out, cfg);
    }
    if (app.got_subcommand(match)) {
      return cmd_match(match_query, match_gallery, match_out, cfg);
    }
    if (app.got_subcommand(eval)) {
      if (eval_trials > 0) cfg.protocol.trials = eval_trials;
      if (eval_min_len >= 0) cfg.protocol.min_track_length = eval_min_len;
      if (!eval_qcam.empty()) cfg.protocol.query_camera = eval_qcam;
      if (!eval_gcam.empty()) cfg.protocol.gallery_camera = eval_gcam;
      return cmd_eval(eval_mode, eval_root, eval_out, cfg);
    }
    if (app.got_subcommand(synth)) return cmd_synth(synth_spec, synth_out, cfg);
    if (app.got_subcommand(selftest)) return cmd_selftest();
  } catch (const mcam::Error& e) {
    std::cerr << "error code=" << error_code_name(e.code()) << " message=\""
              << e.what() << "\"\n";
    return e.exit_status();
  } catch (const std::exception& e) {
    std::cerr << "error code=Internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}

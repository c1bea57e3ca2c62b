#include "mcam/evaluation.hpp"

#include "mcam/errors.hpp"
#include "mcam/parallel.hpp"
#include "mcam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mcam {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

CmcCurve average_curves(const std::vector<CmcCurve>& curves) {
  std::size_t max_len = 0;
  for (const auto& c : curves) max_len = std::max(max_len, c.rates.size());
  CmcCurve avg;
  avg.rates.assign(max_len, 0.0);
  for (const auto& c : curves) {
    for (std::size_t n = 0; n < max_len; ++n) {
      // Shorter curves extend with their terminal value.
      avg.rates[n] += n < c.rates.size() ? c.rates[n] : c.rates.back();
    }
  }
  for (double& r : avg.rates) r /= static_cast<double>(curves.size());
  return avg;
}

std::vector<double> per_rank_stddev(const std::vector<CmcCurve>& curves,
                                    const CmcCurve& mean) {
  std::vector<double> sd(mean.rates.size(), 0.0);
  if (curves.size() < 2) return sd;
  for (std::size_t n = 0; n < mean.rates.size(); ++n) {
    double acc = 0.0;
    for (const auto& c : curves) {
      const double v =
          n < c.rates.size() ? c.rates[n] : c.rates.back();
      acc += (v - mean.rates[n]) * (v - mean.rates[n]);
    }
    sd[n] = std::sqrt(acc / static_cast<double>(curves.size() - 1));
  }
  return sd;
}

struct EvalSets {
  std::vector<int> query_indices;
  std::vector<int> gallery_indices;
};

CmcCurve evaluate_sets(const EvalSets& sets,
                       const std::vector<McamSignature>& signatures,
                       const std::map<std::string, std::string>& person_of,
                       const MetricConfig& metric,
                       const std::vector<FeatureChannelId>& channels) {
  std::vector<McamSignature> queries, gallery;
  std::vector<std::string> query_persons, gallery_persons;
  for (int i : sets.query_indices) {
    queries.push_back(signatures[i]);
    query_persons.push_back(person_of.at(signatures[i].track_id));
  }
  for (int i : sets.gallery_indices) {
    gallery.push_back(signatures[i]);
    gallery_persons.push_back(person_of.at(signatures[i].track_id));
  }
  const SimilarityMatrix sim =
      similarity_matrix(queries, gallery, channels, metric);
  return cmc_curve(sim, query_persons, gallery_persons);
}

std::vector<std::string> sorted_cameras(
    const std::vector<McamSignature>& signatures) {
  std::set<std::string> cams;
  for (const auto& s : signatures) cams.insert(s.camera_id);
  return {cams.begin(), cams.end()};
}

void fisher_yates(std::vector<std::string>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.uniform_index(i)]);
  }
}

}  // namespace

CmcCurve cmc_curve(const SimilarityMatrix& sim,
                   const std::vector<std::string>& query_persons,
                   const std::vector<std::string>& gallery_persons) {
  const int nq = static_cast<int>(sim.query_ids.size());
  const int ng = static_cast<int>(sim.gallery_ids.size());
  if (static_cast<int>(query_persons.size()) != nq ||
      static_cast<int>(gallery_persons.size()) != ng) {
    throw Error(ErrorCode::MissingTruth,
                "ground truth does not cover the similarity matrix");
  }
  for (int q = 0; q < nq; ++q) {
    if (std::find(gallery_persons.begin(), gallery_persons.end(),
                  query_persons[q]) == gallery_persons.end()) {
      throw Error(ErrorCode::MissingTruth,
                  "query person '" + query_persons[q] +
                      "' has no gallery track");
    }
  }

  std::vector<int> matched_at(ng + 1, 0);
  for (int q = 0; q < nq; ++q) {
    const std::vector<int> order = rank_gallery_indices(sim, q);
    for (int pos = 0; pos < ng; ++pos) {
      if (gallery_persons[order[pos]] == query_persons[q]) {
        ++matched_at[pos + 1];
        break;
      }
    }
  }

  CmcCurve curve;
  curve.rates.resize(ng);
  int cumulative = 0;
  for (int n = 1; n <= ng; ++n) {
    cumulative += matched_at[n];
    curve.rates[n - 1] = static_cast<double>(cumulative) / nq;
  }
  return curve;
}

ProtocolResult run_protocol(const ProtocolConfig& cfg,
                            const MetricConfig& metric,
                            const std::vector<FeatureChannelId>& channels,
                            const std::vector<McamSignature>& signatures,
                            const std::map<std::string, std::string>&
                                person_of_track) {
  if (cfg.trials < 1) {
    throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  }
  for (const auto& s : signatures) {
    if (!person_of_track.count(s.track_id)) {
      throw Error(ErrorCode::MissingTruth,
                  "no ground-truth person for track '" + s.track_id + "'");
    }
  }

  // Track indices by camera, with the length filter applied.
  std::map<std::string, std::vector<int>> by_camera;
  for (int i = 0; i < static_cast<int>(signatures.size()); ++i) {
    if (cfg.min_track_length > 0 &&
        signatures[i].n_frames < cfg.min_track_length) {
      continue;
    }
    by_camera[signatures[i].camera_id].push_back(i);
  }
  auto person_of = [&](int i) {
    return person_of_track.at(signatures[i].track_id);
  };

  ProtocolResult result;

  if (cfg.mode == ProtocolMode::PairwiseCameras) {
    const std::vector<std::string> cameras = sorted_cameras(signatures);
    if (cameras.size() < 2) {
      throw Error(ErrorCode::InsufficientIdentities,
                  "pairwise protocol needs at least two cameras");
    }
    const int trials = cfg.trials;  // deterministic; trials repeat the pass
    for (int t = 0; t < trials; ++t) {
      std::vector<CmcCurve> pair_curves;
      for (const auto& cam_q : cameras) {
        for (const auto& cam_g : cameras) {
          if (cam_q == cam_g) continue;
          EvalSets sets;
          sets.gallery_indices = by_camera[cam_g];
          std::set<std::string> gallery_people;
          for (int i : sets.gallery_indices) gallery_people.insert(person_of(i));
          for (int i : by_camera[cam_q]) {
            if (gallery_people.count(person_of(i))) {
              sets.query_indices.push_back(i);
            }
          }
          if (sets.query_indices.empty() || sets.gallery_indices.empty()) {
            continue;
          }
          pair_curves.push_back(
              evaluate_sets(sets, signatures, person_of_track, metric,
                            channels));
        }
      }
      if (pair_curves.empty()) {
        throw Error(ErrorCode::InsufficientIdentities,
                    "no camera pair shares identities");
      }
      result.per_trial.push_back(average_curves(pair_curves));
    }
  } else {
    const std::vector<std::string> cameras = sorted_cameras(signatures);
    std::string cam_q = cfg.query_camera;
    std::string cam_g = cfg.gallery_camera;
    if (cam_q.empty() || cam_g.empty()) {
      if (cameras.size() < 2) {
        throw Error(ErrorCode::InsufficientIdentities,
                    "protocol needs two cameras or explicit camera roles");
      }
      cam_q = cameras[0];
      cam_g = cameras[1];
    }
    if (!by_camera.count(cam_q) || !by_camera.count(cam_g)) {
      throw Error(ErrorCode::InsufficientIdentities,
                  "camera '" + cam_q + "' or '" + cam_g + "' has no tracks");
    }

    if (cfg.mode == ProtocolMode::FixedSets) {
      // No randomness; the fixed protocol runs exactly once.
      EvalSets sets;
      sets.query_indices = by_camera[cam_q];
      sets.gallery_indices = by_camera[cam_g];
      result.per_trial.push_back(evaluate_sets(sets, signatures,
                                               person_of_track, metric,
                                               channels));
    } else {
      // Identities present in both cameras are split 50/50 per trial; the
      // train half is discarded.
      std::set<std::string> people_q, people_g;
      for (int i : by_camera[cam_q]) people_q.insert(person_of(i));
      for (int i : by_camera[cam_g]) people_g.insert(person_of(i));
      std::vector<std::string> eligible;
      for (const auto& p : people_q) {
        if (people_g.count(p)) eligible.push_back(p);
      }
      if (eligible.size() < 2) {
        throw Error(ErrorCode::InsufficientIdentities,
                    "need at least two identities visible in both cameras");
      }

      for (int t = 0; t < cfg.trials; ++t) {
        std::vector<std::string> shuffled = eligible;
        RngStream rng(seed_combine(cfg.seed, static_cast<std::uint64_t>(t)));
        fisher_yates(shuffled, rng);
        const std::size_t test_size = shuffled.size() / 2;
        std::set<std::string> test_people(shuffled.begin(),
                                          shuffled.begin() + test_size);

        EvalSets sets;
        for (int i : by_camera[cam_q]) {
          if (test_people.count(person_of(i))) sets.query_indices.push_back(i);
        }
        for (int i : by_camera[cam_g]) {
          if (test_people.count(person_of(i))) {
            sets.gallery_indices.push_back(i);
          }
        }
        result.per_trial.push_back(evaluate_sets(sets, signatures,
                                                 person_of_track, metric,
                                                 channels));
      }
    }
  }

  result.averaged = average_curves(result.per_trial);
  result.stddev = per_rank_stddev(result.per_trial, result.averaged);
  return result;
}

std::vector<McamSignature> build_signatures(
    const std::vector<PersonTrack>& tracks, const PipelineOptions& pipeline) {
  std::vector<McamSignature> signatures(tracks.size());
  parallel_indexed(static_cast<int>(tracks.size()), [&](int i) {
    signatures[i] = build_signature(tracks[i], pipeline.channels,
                                    pipeline.layout, pipeline.seed);
  });
  return signatures;
}

ProtocolResult run_protocol(const ProtocolConfig& cfg,
                            const PipelineOptions& pipeline,
                            const std::vector<PersonTrack>& tracks) {
  std::map<std::string, std::string> person_of;
  for (const auto& t : tracks) {
    if (!t.person_id) {
      throw Error(ErrorCode::MissingTruth,
                  "track '" + t.track_id + "' has no ground-truth person");
    }
    person_of[t.track_id] = *t.person_id;
  }
  return run_protocol(cfg, pipeline.metric, pipeline.channels,
                      build_signatures(tracks, pipeline), person_of);
}

// ---------------------------------------------------------------------------
// Synthetic tracks
// ---------------------------------------------------------------------------

namespace {

struct Rgb {
  double r, g, b;
};

// Zero-sum chroma basis: shifts move color without changing mean intensity.
Rgb chroma_shift(double angle, double magnitude) {
  const double e1[3] = {0.8164965809, -0.4082482905, -0.4082482905};
  const double e2[3] = {0.0, 0.7071067812, -0.7071067812};
  const double c = std::cos(angle), s = std::sin(angle);
  return {magnitude * (c * e1[0] + s * e2[0]),
          magnitude * (c * e1[1] + s * e2[1]),
          magnitude * (c * e1[2] + s * e2[2])};
}

double fract(double x) { return x - std::floor(x); }

}  // namespace

std::vector<PersonTrack> generate_synthetic_tracks(const SyntheticSpec& spec,
                                                   std::uint64_t seed) {
  if (spec.identities < 1 || spec.cameras < 1 || spec.frames_per_track < 1 ||
      spec.modes_per_identity < 1 || spec.frame_w < 2 || spec.frame_h < 2) {
    throw Error(ErrorCode::InvalidConfig, "synthetic spec counts must be positive");
  }
  if (spec.separation < 0.0 || spec.noise < 0.0 ||
      spec.fragmentation < 0.0 || spec.fragmentation > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "synthetic spec scales out of range");
  }
  std::vector<double> fractions = spec.mode_fractions;
  if (fractions.empty()) {
    fractions.assign(spec.modes_per_identity,
                     1.0 / spec.modes_per_identity);
  }
  if (static_cast<int>(fractions.size()) != spec.modes_per_identity) {
    throw Error(ErrorCode::InvalidConfig,
                "mode_fractions must match modes_per_identity");
  }

  std::vector<PersonTrack> tracks;
  const int w = spec.frame_w, h = spec.frame_h;

  for (int id = 0; id < spec.identities; ++id) {
    // Identity appearance: shirt/pants chroma on low-discrepancy angles plus
    // a stripe texture with identity-specific period.
    const double shirt_angle = fract(id * 0.61803398875) * kTwoPi;
    const double pants_angle = fract(id * 0.75487766625 + 0.37) * kTwoPi;
    const double shirt_radius = 0.55 + 0.45 * fract(id * 0.56984029);
    const double pants_radius = 0.55 + 0.45 * fract(id * 0.38196601 + 0.11);
    const Rgb shirt = chroma_shift(shirt_angle, spec.separation * shirt_radius);
    const Rgb pants = chroma_shift(pants_angle, spec.separation * pants_radius);
    const int stripe_period = 4 + (id % 7) * 2;
    const double stripe_phase = fract(id * 0.238745) * kTwoPi;

    for (int cam = 0; cam < spec.cameras; ++cam) {
      RngStream rng(seed_combine(seed_combine(seed, "synth"),
                                 static_cast<std::uint64_t>(id) * 131071u +
                                     static_cast<std::uint64_t>(cam)));

      const Rgb cam_tint = chroma_shift(fract(cam * 0.171573) * kTwoPi, 0.03);
      const double cam_gain = 1.0 + 0.06 * std::sin(cam * 2.399963);

      // Mode spans: contiguous frame ranges, in order.
      std::vector<int> mode_of_frame(spec.frames_per_track, 0);
      int cursor = 0;
      for (int m = 0; m < spec.modes_per_identity; ++m) {
        int count = static_cast<int>(
            std::round(fractions[m] * spec.frames_per_track));
        if (m == spec.modes_per_identity - 1) {
          count = spec.frames_per_track - cursor;
        }
        for (int f = 0; f < count && cursor < spec.frames_per_track;
             ++f, ++cursor) {
          mode_of_frame[cursor] = m;
        }
      }

      PersonTrack track;
      track.person_id = "p" + std::to_string(id);
      track.camera_id = "cam" + std::to_string(cam);
      track.track_id = *track.person_id + "_" + track.camera_id + "_t0";

      for (int f = 0; f < spec.frames_per_track; ++f) {
        const int mode = mode_of_frame[f];
        Rgb mode_shift{0.0, 0.0, 0.0};
        double mode_gain = 1.0;
        if (mode > 0) {
          mode_shift = chroma_shift(shirt_angle + 2.0 + mode * 1.7,
                                    0.8 * spec.separation);
          mode_gain = 1.0 + 0.25 * spec.separation * (mode % 2 == 0 ? -1 : 1);
        }
        const Rgb jitter = {spec.noise * rng.normal(),
                            spec.noise * rng.normal(),
                            spec.noise * rng.normal()};

        Image img = make_image(w, h);
        for (int y = 0; y < h; ++y) {
          const double v = static_cast<double>(y) / (h - 1);
          Rgb base;
          if (v < 0.18) {
            base = {0.80, 0.65, 0.55};  // head
          } else if (v < 0.55) {
            base = {0.5 + shirt.r, 0.5 + shirt.g, 0.5 + shirt.b};
            const double stripe =
                0.12 * std::sin(kTwoPi * y / stripe_period + stripe_phase);
            base.r += stripe;
            base.g += stripe;
            base.b += stripe;
          } else if (v < 0.92) {
            base = {0.5 + pants.r, 0.5 + pants.g, 0.5 + pants.b};
          } else {
            base = {0.15, 0.15, 0.15};  // shoes
          }
          // Vertical lightness ramp keeps per-frame L histograms spread out.
          const double ramp = 0.88 + 0.24 * v;
          for (int x = 0; x < w; ++x) {
            const double dither = spec.noise * 0.5 * (rng.uniform() - 0.5);
            double* px = img.pixel(x, y);
            px[0] = std::clamp((base.r * ramp + mode_shift.r + cam_tint.r +
                                jitter.r + dither) *
                                   cam_gain * mode_gain,
                               0.0, 1.0);
            px[1] = std::clamp((base.g * ramp + mode_shift.g + cam_tint.g +
                                jitter.g + dither) *
                                   cam_gain * mode_gain,
                               0.0, 1.0);
            px[2] = std::clamp((base.b * ramp + mode_shift.b + cam_tint.b +
                                jitter.b + dither) *
                                   cam_gain * mode_gain,
                               0.0, 1.0);
          }
        }
        track.frames.push_back(std::move(img));
      }

      if (spec.fragmentation > 0.0 && rng.uniform() < spec.fragmentation &&
          track.length() >= 2) {
        const int cut =
            1 + static_cast<int>(rng.uniform() * (track.length() - 1));
        PersonTrack second = track;
        second.track_id = *track.person_id + "_" + track.camera_id + "_t1";
        second.frames.assign(track.frames.begin() + cut, track.frames.end());
        track.frames.resize(cut);
        tracks.push_back(std::move(track));
        tracks.push_back(std::move(second));
      } else {
        tracks.push_back(std::move(track));
      }
    }
  }
  return tracks;
}

}  // namespace mcam

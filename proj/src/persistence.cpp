#include "mcam/persistence.hpp"

#include "mcam/errors.hpp"
#include "mcam/rng.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mcam {

namespace fs = std::filesystem;

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ia = i, jb = j;
      while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia])))
        ++ia;
      while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb])))
        ++jb;
      // Compare digit runs by value: strip leading zeros, then by length.
      std::size_t sa = i, sb = j;
      while (sa < ia - 1 && a[sa] == '0') ++sa;
      while (sb < jb - 1 && b[sb] == '0') ++sb;
      const std::size_t la = ia - sa, lb = jb - sb;
      if (la != lb) return la < lb;
      const int cmp = a.compare(sa, la, b, sb, lb);
      if (cmp != 0) return cmp < 0;
      // Equal values: fewer leading zeros first.
      if (ia - i != jb - j) return ia - i < jb - j;
      i = ia;
      j = jb;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

Image load_image(const fs::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) {
    throw Error(ErrorCode::DecodeError,
                "cannot decode image '" + path.string() + "'");
  }
  Image img;
  img.width = mat.cols;
  img.height = mat.rows;
  img.data.resize(static_cast<std::size_t>(3) * mat.cols * mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const cv::Vec3b* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) {
      double* px = img.pixel(x, y);
      px[0] = row[x][2] / 255.0;  // OpenCV stores BGR
      px[1] = row[x][1] / 255.0;
      px[2] = row[x][0] / 255.0;
    }
  }
  return img;
}

void save_image(const fs::path& path, const Image& image) {
  if (image.empty()) {
    throw Error(ErrorCode::EmptyImage, "refusing to save an empty image");
  }
  cv::Mat mat(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    cv::Vec3b* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      const double* px = image.pixel(x, y);
      row[x][2] = static_cast<unsigned char>(
          std::clamp(std::lround(px[0] * 255.0), 0L, 255L));
      row[x][1] = static_cast<unsigned char>(
          std::clamp(std::lround(px[1] * 255.0), 0L, 255L));
      row[x][0] = static_cast<unsigned char>(
          std::clamp(std::lround(px[2] * 255.0), 0L, 255L));
    }
  }
  if (!cv::imwrite(path.string(), mat)) {
    throw Error(ErrorCode::IoError, "cannot write image '" + path.string() + "'");
  }
}

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  return out;
}

std::vector<fs::path> sorted_image_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && has_image_extension(e.path())) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  return out;
}

void add_track(DatasetIndex& index, const std::string& camera,
               const std::string& person, const std::string& track,
               const std::vector<fs::path>& files) {
  TrackEntry entry;
  entry.camera_id = camera;
  entry.person_id = person;
  entry.track_id = camera + "/" + person + "/" + track;
  for (const auto& f : files) {
    try {
      load_image(f);
      entry.frame_files.push_back(f);
    } catch (const Error&) {
      index.warnings.push_back("skipped undecodable frame " + f.string());
    }
  }
  if (entry.frame_files.empty()) {
    index.warnings.push_back("skipped track " + entry.track_id +
                             " with no decodable frames");
    return;
  }
  index.entries.push_back(std::move(entry));
}

}  // namespace

DatasetIndex ingest_dataset(const fs::path& root) {
  if (!fs::exists(root) || !fs::is_directory(root)) {
    throw Error(ErrorCode::MissingRoot,
                "dataset root '" + root.string() + "' does not exist");
  }

  DatasetIndex index;
  index.root = root;
  for (const auto& camera_dir : sorted_subdirs(root)) {
    const std::string camera = camera_dir.filename().string();
    for (const auto& person_dir : sorted_subdirs(camera_dir)) {
      const std::string person = person_dir.filename().string();

      // Shorthand: frames directly under the person directory are track "0".
      const auto direct = sorted_image_files(person_dir);
      if (!direct.empty()) {
        add_track(index, camera, person, "0", direct);
      }
      for (const auto& track_dir : sorted_subdirs(person_dir)) {
        add_track(index, camera, person, track_dir.filename().string(),
                  sorted_image_files(track_dir));
      }
    }
  }
  if (index.entries.empty()) {
    throw Error(ErrorCode::EmptyDataset,
                "no decodable tracks under '" + root.string() + "'");
  }
  return index;
}

PersonTrack load_track(const TrackEntry& entry) {
  PersonTrack track;
  track.track_id = entry.track_id;
  track.camera_id = entry.camera_id;
  track.person_id = entry.person_id;
  for (const auto& f : entry.frame_files) {
    track.frames.push_back(load_image(f));
  }
  return track;
}

void save_dataset(const fs::path& root,
                  const std::vector<PersonTrack>& tracks) {
  for (const auto& track : tracks) {
    if (!track.person_id) {
      throw Error(ErrorCode::MissingTruth,
                  "cannot lay out a dataset without person ids");
    }
    // Track directories use the local id suffix, keeping ids path-safe.
    std::string local = track.track_id;
    const auto slash = local.find_last_of('/');
    if (slash != std::string::npos) local = local.substr(slash + 1);
    const fs::path dir = root / track.camera_id / *track.person_id / local;
    fs::create_directories(dir);
    for (int f = 0; f < track.length(); ++f) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04d.png", f);
      save_image(dir / name, track.frames[f]);
    }
  }
}

// ---------------------------------------------------------------------------
// Signature serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSignatureHeader = "mcam-signatures v1";

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, int record,
                    const char* what) {
  double v = 0.0;
  const auto res =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(ErrorCode::CorruptRecord,
                std::string("record ") + std::to_string(record) + ": bad " +
                    what + " '" + token + "'");
  }
  return v;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

// Reads a possibly quoted token from the stream.
std::string read_token(std::istringstream& in, int record) {
  in >> std::ws;
  if (in.peek() != '"') {
    std::string t;
    in >> t;
    return t;
  }
  in.get();
  std::string out;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '\\') {
      const int next = in.get();
      if (next == EOF) break;
      out += static_cast<char>(next);
    } else if (c == '"') {
      return out;
    } else {
      out += static_cast<char>(c);
    }
  }
  throw Error(ErrorCode::CorruptRecord,
              "record " + std::to_string(record) + ": unterminated string");
}

}  // namespace

std::uint64_t config_hash(const PipelineOptions& pipeline) {
  std::string canon;
  canon += "w=" + std::to_string(pipeline.layout.window_w);
  canon += ";h=" + std::to_string(pipeline.layout.window_h);
  canon += ";rw=" + std::to_string(pipeline.layout.region_w);
  canon += ";rh=" + std::to_string(pipeline.layout.region_h);
  canon += ";stride=" + std::to_string(pipeline.layout.stride);
  canon += ";features=" + channel_list_to_string(pipeline.channels);
  canon += ";a=" + format_double(pipeline.metric.a);
  canon += ";b=" + format_double(pipeline.metric.b);
  canon += ";delta=" + format_double(pipeline.metric.delta);
  canon += ";wres=" + format_double(pipeline.metric.w_residual);
  canon += ";wcode=" + format_double(pipeline.metric.w_coding);
  canon += ";krf=" + format_double(pipeline.metric.kernel_range_factor);
  canon += ";seed=" + std::to_string(pipeline.seed);
  return seed_combine(0x6d63616dULL, canon);
}

void save_signatures(const fs::path& path,
                     const std::vector<McamSignature>& signatures,
                     std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() +
                                        "' for writing");
  }
  out << kSignatureHeader << "\n";
  out << "config " << config_hash << "\n";
  out << "count " << signatures.size() << "\n";
  for (const auto& sig : signatures) {
    out << "signature " << quote(sig.track_id) << " " << quote(sig.camera_id)
        << " " << sig.n_frames << " " << sig.mixtures.size() << "\n";
    for (const auto& m : sig.mixtures) {
      const int dim =
          m.components.empty() ? 0 : m.components.front().dim();
      out << "mixture " << channel_name(m.channel) << " "
          << m.components.size() << " " << dim << "\n";
      for (const auto& c : m.components) {
        out << "component " << format_double(c.prior) << "\n";
        out << "mean";
        for (double v : c.mean) out << " " << format_double(v);
        out << "\nvar";
        for (double v : c.var) out << " " << format_double(v);
        out << "\n";
      }
    }
    out << "end\n";
  }
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
  }
}

SignatureFile load_signatures(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kSignatureHeader) {
    throw Error(ErrorCode::VersionMismatch,
                "unsupported signature file header '" + line + "'");
  }

  SignatureFile file;
  auto next_line = [&](int record) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::CorruptRecord,
                  "record " + std::to_string(record) + ": truncated file");
    }
    return std::istringstream(line);
  };

  {
    auto ls = next_line(0);
    std::string key;
    ls >> key >> file.config_hash;
    if (key != "config" || ls.fail()) {
      throw Error(ErrorCode::CorruptRecord, "record 0: bad config line");
    }
  }
  std::size_t count = 0;
  {
    auto ls = next_line(0);
    std::string key;
    ls >> key >> count;
    if (key != "count" || ls.fail()) {
      throw Error(ErrorCode::CorruptRecord, "record 0: bad count line");
    }
  }

  for (std::size_t r = 0; r < count; ++r) {
    const int record = static_cast<int>(r);
    auto ls = next_line(record);
    std::string key;
    ls >> key;
    if (key != "signature") {
      throw Error(ErrorCode::CorruptRecord,
                  "record " + std::to_string(record) +
                      ": expected signature line, got '" + line + "'");
    }
    McamSignature sig;
    sig.track_id = read_token(ls, record);
    sig.camera_id = read_token(ls, record);
    std::size_t n_channels = 0;
    ls >> sig.n_frames >> n_channels;
    if (ls.fail() || sig.n_frames < 1) {
      throw Error(ErrorCode::CorruptRecord,
                  "record " + std::to_string(record) + ": bad signature line");
    }

    for (std::size_t mi = 0; mi < n_channels; ++mi) {
      auto ml = next_line(record);
      std::string mkey, channel;
      std::size_t k = 0;
      std::size_t dim = 0;
      ml >> mkey >> channel >> k >> dim;
      if (mkey != "mixture" || ml.fail() || k < 1) {
        throw Error(ErrorCode::CorruptRecord,
                    "record " + std::to_string(record) + ": bad mixture line");
      }
      AppearanceMixture mixture;
      mixture.channel = channel_from_name(channel);

      double prior_sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        GaussianComponent comp;
        {
          auto cl = next_line(record);
          std::string ckey, value;
          cl >> ckey >> value;
          if (ckey != "component" || cl.fail()) {
            throw Error(ErrorCode::CorruptRecord,
                        "record " + std::to_string(record) +
                            ": bad component line");
          }
          comp.prior = parse_double(value, record, "prior");
        }
        auto read_vector = [&](const char* tag, std::vector<double>& dst) {
          auto vl = next_line(record);
          std::string vkey;
          vl >> vkey;
          if (vkey != tag) {
            throw Error(ErrorCode::CorruptRecord,
                        "record " + std::to_string(record) + ": expected " +
                            tag + " line");
          }
          std::string tok;
          while (vl >> tok) dst.push_back(parse_double(tok, record, tag));
          if (dst.size() != dim) {
            throw Error(ErrorCode::CorruptRecord,
                        "record " + std::to_string(record) + ": " + tag +
                            " has " + std::to_string(dst.size()) +
                            " entries, expected " + std::to_string(dim));
          }
        };
        read_vector("mean", comp.mean);
        read_vector("var", comp.var);
        for (double v : comp.var) {
          if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::CorruptRecord,
                        "record " + std::to_string(record) +
                            ": non-positive variance entry");
          }
        }
        prior_sum += comp.prior;
        mixture.components.push_back(std::move(comp));
      }
      if (std::abs(prior_sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::CorruptRecord,
                    "record " + std::to_string(record) +
                        ": priors sum to " + format_double(prior_sum));
      }
      sig.mixtures.push_back(std::move(mixture));
    }

    {
      auto el = next_line(record);
      std::string ekey;
      el >> ekey;
      if (ekey != "end") {
        throw Error(ErrorCode::CorruptRecord,
                    "record " + std::to_string(record) + ": missing end");
      }
    }
    file.signatures.push_back(std::move(sig));
  }
  return file;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

void write_similarity_results(const fs::path& path,
                              const SimilarityMatrix& sim) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() +
                                        "' for writing");
  }
  out << "mcam-results v1\n";
  out << "queries " << sim.query_ids.size() << " galleries "
      << sim.gallery_ids.size() << "\n";
  out << "gallery";
  for (const auto& g : sim.gallery_ids) out << " " << quote(g);
  out << "\n";
  for (std::size_t q = 0; q < sim.query_ids.size(); ++q) {
    out << "row " << quote(sim.query_ids[q]);
    for (std::size_t g = 0; g < sim.gallery_ids.size(); ++g) {
      out << " " << format_double(sim.at(static_cast<int>(q),
                                         static_cast<int>(g)));
    }
    out << "\n";
  }
  for (const auto& q : sim.query_ids) {
    out << "rank " << quote(q);
    for (const auto& g : rank_gallery(sim, q)) out << " " << quote(g);
    out << "\n";
  }
}

void write_cmc_table(const fs::path& path, const ProtocolResult& result) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() +
                                        "' for writing");
  }
  out << "# rank\trate\tstddev\n";
  for (std::size_t n = 0; n < result.averaged.rates.size(); ++n) {
    out << (n + 1) << "\t" << format_double(result.averaged.rates[n]) << "\t"
        << format_double(n < result.stddev.size() ? result.stddev[n] : 0.0)
        << "\n";
  }
}

// ---------------------------------------------------------------------------
// Key=value configuration
// ---------------------------------------------------------------------------

std::map<std::string, std::string> load_key_value_config(
    const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config '" + path.string() +
                                        "'");
  }
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  path.string() + ":" + std::to_string(line_no) +
                      ": expected key=value");
    }
    kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return kv;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig,
                "config key '" + key + "': bad number '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig,
                "config key '" + key + "': bad integer '" + value + "'");
  }
}

}  // namespace

void apply_config(const std::map<std::string, std::string>& kv,
                  RuntimeConfig& cfg) {
  int w = cfg.pipeline.layout.window_w, h = cfg.pipeline.layout.window_h;
  int rw = cfg.pipeline.layout.region_w, rh = cfg.pipeline.layout.region_h;
  int stride = cfg.pipeline.layout.stride;
  bool layout_touched = false;

  for (const auto& [key, value] : kv) {
    if (key == "window.width") {
      w = static_cast<int>(to_long(key, value));
      layout_touched = true;
    } else if (key == "window.height") {
      h = static_cast<int>(to_long(key, value));
      layout_touched = true;
    } else if (key == "region.width") {
      rw = static_cast<int>(to_long(key, value));
      layout_touched = true;
    } else if (key == "region.height") {
      rh = static_cast<int>(to_long(key, value));
      layout_touched = true;
    } else if (key == "region.stride") {
      stride = static_cast<int>(to_long(key, value));
      layout_touched = true;
    } else if (key == "features") {
      cfg.pipeline.channels = parse_channel_list(value);
    } else if (key == "seed") {
      cfg.pipeline.seed = static_cast<std::uint64_t>(to_long(key, value));
      cfg.protocol.seed = cfg.pipeline.seed;
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_long(key, value));
    } else if (key == "metric.a") {
      cfg.pipeline.metric.a = to_double(key, value);
    } else if (key == "metric.b") {
      cfg.pipeline.metric.b = to_double(key, value);
    } else if (key == "metric.delta") {
      cfg.pipeline.metric.delta = to_double(key, value);
    } else if (key == "metric.w_residual") {
      cfg.pipeline.metric.w_residual = to_double(key, value);
    } else if (key == "metric.w_coding") {
      cfg.pipeline.metric.w_coding = to_double(key, value);
    } else if (key == "metric.kernel_range_factor") {
      cfg.pipeline.metric.kernel_range_factor = to_double(key, value);
    } else if (key == "protocol.trials") {
      cfg.protocol.trials = static_cast<int>(to_long(key, value));
    } else if (key == "protocol.min_track_length") {
      cfg.protocol.min_track_length = static_cast<int>(to_long(key, value));
    } else if (key == "protocol.query_camera") {
      cfg.protocol.query_camera = value;
    } else if (key == "protocol.gallery_camera") {
      cfg.protocol.gallery_camera = value;
    } else if (key == "protocol.mode") {
      if (value == "pairwise") {
        cfg.protocol.mode = ProtocolMode::PairwiseCameras;
      } else if (value == "split") {
        cfg.protocol.mode = ProtocolMode::RandomHalfSplit;
      } else if (value == "fixed") {
        cfg.protocol.mode = ProtocolMode::FixedSets;
      } else {
        throw Error(ErrorCode::InvalidConfig,
                    "protocol.mode must be pairwise, split, or fixed");
      }
    } else if (key == "dataset.root") {
      cfg.dataset_root = value;
    } else if (key == "synth.identities") {
      cfg.synth.identities = static_cast<int>(to_long(key, value));
    } else if (key == "synth.cameras") {
      cfg.synth.cameras = static_cast<int>(to_long(key, value));
    } else if (key == "synth.frames") {
      cfg.synth.frames_per_track = static_cast<int>(to_long(key, value));
    } else if (key == "synth.modes") {
      cfg.synth.modes_per_identity = static_cast<int>(to_long(key, value));
    } else if (key == "synth.separation") {
      cfg.synth.separation = to_double(key, value);
    } else if (key == "synth.noise") {
      cfg.synth.noise = to_double(key, value);
    } else if (key == "synth.fragmentation") {
      cfg.synth.fragmentation = to_double(key, value);
    } else if (key == "synth.frame_width") {
      cfg.synth.frame_w = static_cast<int>(to_long(key, value));
    } else if (key == "synth.frame_height") {
      cfg.synth.frame_h = static_cast<int>(to_long(key, value));
    } else if (key == "synth.mode_fractions") {
      cfg.synth.mode_fractions.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        cfg.synth.mode_fractions.push_back(to_double(key, tok));
      }
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  }

  if (layout_touched) {
    cfg.pipeline.layout = build_region_layout(w, h, rw, rh, stride);
  }
  if (const char* env = std::getenv("MCAM_DATASET_ROOT")) {
    cfg.dataset_root = env;
  }
}

}  // namespace mcam

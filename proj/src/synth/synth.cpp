// Copyright 2026 The gazelex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gazelex/synth/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "gazelex/gaze/io.hpp"

namespace gazelex::synth {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> syllables(std::mt19937_64& rng) {
  static const char* kOnsets[] = {"",   "b",  "c",  "d",  "f",  "g",  "h",  "j",  "k",  "l",
                                  "m",  "n",  "p",  "r",  "s",  "t",  "v",  "w",  "z",  "br",
                                  "cl", "st", "tr", "pl", "gr", "sh", "ch", "th", "qu", "sp",
                                  "fl", "kr", "sn", "dr", "ph", "sc", "wh", "x",  "y",  "gl"};
  static const char* kNuclei[] = {"a", "e", "i", "o", "u", "ai", "ea", "ou", "io", "y", "ee", "oa"};
  static const char* kCodas[] = {"", "n", "r", "s", "t", "l", "m", "x", "ck", "nd", "st", "ph"};
  std::vector<std::string> out;
  for (const char* o : kOnsets) {
    for (const char* n : kNuclei) {
      for (const char* c : kCodas) out.push_back(std::string(o) + n + c);
    }
  }
  // Plain CV syllables first so frequent words look ordinary.
  std::stable_sort(out.begin(), out.end(),
                   [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
  std::shuffle(out.begin() + 40, out.end(), rng);
  return out;
}

const std::vector<std::string>& name_list() {
  static const std::vector<std::string> kNames = {
      "Paris",  "London", "Berlin", "Tokyo",   "Rome",    "Madrid",  "Boston", "Chicago",
      "Europe", "Asia",   "Africa", "China",   "Japan",   "France",  "Egypt",  "Texas",
      "John",   "Mary",   "James",  "Sarah",   "Peter",   "Newton",  "Darwin", "Lincoln",
      "Google", "NASA",   "UNESCO", "Congress"};
  return kNames;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix(master ^ fnv1a(tag));
}

std::size_t Lexicon::rank(std::string_view word) const {
  auto it = rank_of.find(text::normalize_word(word));
  return it == rank_of.end() ? 0 : it->second;
}

text::PageGeometry CorpusConfig::two_column_geometry() {
  text::PageGeometry g;
  g.left = 60;
  g.top = 80;
  g.width = 540;
  g.columns = 2;
  g.column_gap = 40;
  g.char_width = 7;
  g.space_width = 5;
  g.line_height = 20.63;
  return g;
}

nlohmann::json CorpusConfig::to_json() const {
  return {{"seed", seed},
          {"n_docs", n_docs},
          {"words_per_doc", words_per_doc},
          {"lexicon_size", lexicon_size},
          {"zipf_exponent", zipf_exponent},
          {"columns", geometry.columns},
          {"line_height", geometry.line_height}};
}

Lexicon gen_lexicon(std::uint64_t seed, std::size_t size, double zipf_exponent) {
  std::mt19937_64 rng(derive_seed(seed, "lexicon"));
  const auto syl = syllables(rng);
  const auto& fw = text::function_words();
  const auto& names = name_list();
  if (size < fw.size() + names.size() + 100) {
    throw std::invalid_argument("lexicon_size too small");
  }
  std::vector<std::string> words(size);
  std::vector<bool> filled(size, false);
  std::unordered_set<std::string> used;
  // Function words take two of every three of the top slots.
  std::size_t next_fw = 0;
  for (std::size_t s = 0; s < size && next_fw < fw.size(); ++s) {
    if (s % 3 == 2) continue;
    words[s] = fw[next_fw++];
    filled[s] = true;
    used.insert(words[s]);
  }
  // Names at fixed pseudo-random mid ranks.
  std::uniform_int_distribution<std::size_t> name_rank(60, std::min<std::size_t>(size - 1, 3000));
  for (const auto& n : names) {
    std::size_t r = name_rank(rng);
    while (filled[r]) r = (r + 1) % size;
    words[r] = n;
    filled[r] = true;
    used.insert(text::normalize_word(n));
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double log_n = std::log(double(size));
  for (std::size_t s = 0; s < size; ++s) {
    if (filled[s]) continue;
    const double rarity = std::log(double(s + 1)) / log_n;  // 0 frequent .. 1 rare
    const double skew = 0.4 + 3.5 * (1.0 - rarity);
    std::string w;
    do {
      int n_syl = 1 + (rarity > 0.45) + (rarity > 0.8) + (u(rng) < 0.35 * rarity);
      w.clear();
      for (int k = 0; k < n_syl; ++k) {
        const auto idx = static_cast<std::size_t>(double(syl.size()) * std::pow(u(rng), skew));
        w += syl[std::min(idx, syl.size() - 1)];
      }
    } while (w.size() < 2 || used.contains(w) || text::is_function_word(w));
    used.insert(w);
    words[s] = w;
  }
  Lexicon lex;
  lex.words = std::move(words);
  double z = 0.0;
  for (std::size_t r = 1; r <= size; ++r) z += std::pow(double(r), -zipf_exponent);
  for (std::size_t r = 1; r <= size; ++r) {
    lex.probability.push_back(std::pow(double(r), -zipf_exponent) / z);
    lex.rank_of.emplace(text::normalize_word(lex.words[r - 1]), r);
  }
  return lex;
}

Corpus gen_corpus(const CorpusConfig& config) {
  if (config.words_per_doc < 50) throw std::invalid_argument("words_per_doc must be >= 50");
  Corpus corpus;
  corpus.lexicon = gen_lexicon(config.seed, config.lexicon_size, config.zipf_exponent);
  const auto& lex = corpus.lexicon;
  std::discrete_distribution<std::size_t> pick(lex.probability.begin(), lex.probability.end());
  for (std::size_t d = 0; d < config.n_docs; ++d) {
    char id[16];
    std::snprintf(id, sizeof id, "d%02zu", d);
    std::mt19937_64 rng(derive_seed(config.seed, std::string("doc/") + id));
    std::uniform_int_distribution<std::size_t> jitter(0, 40);
    std::uniform_int_distribution<int> sent_len(8, 22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Document length varies around the configured mean.
    const std::size_t n = config.words_per_doc - 20 + jitter(rng);
    std::vector<std::string> words;
    int left_in_sentence = sent_len(rng);
    bool sentence_start = true;
    while (words.size() < n) {
      std::string w = lex.words[pick(rng)];
      if (sentence_start) w = capitalize(w);
      sentence_start = false;
      if (--left_in_sentence == 0 || words.size() + 1 == n) {
        w += '.';
        left_in_sentence = sent_len(rng);
        sentence_start = true;
      } else if (u(rng) < 0.06) {
        w += ',';
      }
      words.push_back(std::move(w));
    }
    corpus.docs.push_back(text::render_layout(id, words, config.geometry));
  }
  corpus.frequency = text::FrequencyTable::from_corpus(corpus.docs);
  return corpus;
}

void UserProfile::validate() const {
  if (!(proficiency > 0)) throw std::invalid_argument("proficiency must be positive");
  if (!(label_noise >= 0 && label_noise <= 0.2)) {
    throw std::invalid_argument("label_noise must be in [0, 0.2]");
  }
  if (!(dwell_gain > 0)) throw std::invalid_argument("dwell_gain must be positive");
  if (!(regression_prob >= 0 && regression_prob <= 1)) {
    throw std::invalid_argument("regression_prob must be in [0, 1]");
  }
}

nlohmann::json UserProfile::to_json() const {
  return {{"user_id", user_id},
          {"proficiency", proficiency},
          {"label_noise", label_noise},
          {"dwell_gain", dwell_gain},
          {"regression_prob", regression_prob}};
}

std::vector<bool> assign_labels(const UserProfile& profile, const DocumentLayout& layout,
                                const Lexicon& lexicon, std::uint64_t seed) {
  profile.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bool> out(layout.words.size(), false);
  for (std::size_t i = 0; i < layout.words.size(); ++i) {
    const double coin = u(rng);  // drawn for every word to keep streams aligned
    if (layout.words[i].is_function_word) continue;
    const bool rare = double(lexicon.rank(layout.words[i].text)) > profile.proficiency;
    out[i] = rare ? coin >= profile.label_noise : coin < profile.label_noise;
  }
  return out;
}

NoiseModel NoiseModel::tracker() { return {}; }

NoiseModel NoiseModel::webcam() {
  NoiseModel n;
  n.kind = Source::kWebcam;
  n.rate_hz = 24.0;
  n.rate_hz_max = 27.0;
  n.jitter_x = 40.0;
  n.jitter_y = 25.0;
  n.offset_x = 160.0;
  n.offset_y = 95.0;
  n.offset_tau_s = 30.0;
  n.drift_px_per_min = 10.0;
  n.dropout = 0.03;
  n.blink_rate_hz = 0.1;
  return n;
}

nlohmann::json NoiseModel::to_json() const {
  return {{"kind", gaze::to_string(kind)},
          {"rate_hz", rate_hz},
          {"rate_hz_max", rate_hz_max},
          {"jitter", {jitter_x, jitter_y}},
          {"offset", {offset_x, offset_y}},
          {"offset_tau_s", offset_tau_s},
          {"drift_px_per_min", drift_px_per_min},
          {"dropout", dropout},
          {"blink_rate_hz", blink_rate_hz}};
}

std::pair<double, double> Scanpath::position(double t_ms) const {
  if (fixations.empty()) return {0.0, 0.0};
  auto it = std::upper_bound(fixations.begin(), fixations.end(), t_ms,
                             [](double t, const Fixation& f) { return t < f.start_ms; });
  if (it == fixations.begin()) return {fixations.front().x, fixations.front().y};
  const Fixation& prev = *(it - 1);
  if (t_ms <= prev.end_ms || it == fixations.end()) return {prev.x, prev.y};
  const double a = (t_ms - prev.end_ms) / (it->start_ms - prev.end_ms);
  return {prev.x + a * (it->x - prev.x), prev.y + a * (it->y - prev.y)};
}

Scanpath plan_scanpath(const DocumentLayout& layout, const std::vector<bool>& labels,
                       const UserProfile& profile, std::uint64_t seed,
                       const ReadingConfig& reading) {
  if (layout.words.empty()) throw std::invalid_argument("cannot read an empty layout");
  if (labels.size() != layout.words.size()) {
    throw std::invalid_argument("labels do not cover the layout");
  }
  profile.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double base = 1000.0 / reading.words_per_second - reading.saccade_ms;
  const double s = reading.duration_spread;
  auto duration = [&](bool unknown) {
    const double d = base * std::exp(s * n01(rng) - s * s / 2.0);
    return unknown ? d * profile.dwell_gain : d;
  };
  auto landing = [&](std::size_t i) {
    const auto& b = layout.words[i].box;
    return std::pair{b.center_x() + (u(rng) - 0.5) * 0.5 * b.width(), b.center_y()};
  };

  Scanpath path;
  double t = 0.0;
  auto fixate = [&](std::size_t i, double dur, double move_ms) {
    t += move_ms;
    auto [x, y] = landing(i);
    path.fixations.push_back({t, t + dur, x, y, i});
    t += dur;
  };
  std::size_t pending_regression = SIZE_MAX;
  for (std::size_t i = 0; i < layout.words.size(); ++i) {
    const bool new_line = i > 0 && layout.words[i].line_index != layout.words[i - 1].line_index;
    fixate(i, duration(labels[i]), i == 0 ? 0.0 : new_line ? reading.return_sweep_ms
                                                           : reading.saccade_ms);
    if (pending_regression != SIZE_MAX) {
      fixate(pending_regression, reading.regression_ms * std::exp(s * n01(rng) - s * s / 2.0),
             reading.saccade_ms);
      pending_regression = SIZE_MAX;
    }
    if (labels[i] && u(rng) < profile.regression_prob) pending_regression = i;
  }
  path.duration_ms = t;
  return path;
}

GazeStream render_gaze(const Scanpath& path, const NoiseModel& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double rate = noise.rate_hz + (noise.rate_hz_max - noise.rate_hz) * u(rng);
  const double period = 1000.0 / rate;
  const double angle = 2.0 * std::numbers::pi * u(rng);
  const double drift = noise.drift_px_per_min / 60000.0;
  double ox = noise.offset_x * n01(rng), oy = noise.offset_y * n01(rng);

  // Blink intervals as a Poisson process.
  std::vector<std::pair<double, double>> blinks;  // start, displacement
  if (noise.blink_rate_hz > 0) {
    double tb = -std::log(1.0 - u(rng)) * 1000.0 / noise.blink_rate_hz;
    while (tb < path.duration_ms) {
      blinks.emplace_back(tb, -(150.0 + 150.0 * u(rng)));
      tb += 100.0 - std::log(1.0 - u(rng)) * 1000.0 / noise.blink_rate_hz;
    }
  }
  std::size_t blink = 0;

  GazeStream out;
  double last_t = -1.0, prev_t = 0.0;
  const bool jitter_clock = noise.kind == Source::kWebcam;
  for (std::size_t k = 0;; ++k) {
    double t = double(k) * period;
    if (jitter_clock) t += (u(rng) - 0.5) * 0.3 * period;
    t = std::round(t);
    if (t > path.duration_ms) break;
    if (t <= last_t) continue;
    // Exact OU update over the elapsed interval.
    const double dt = (t - prev_t) / 1000.0;
    prev_t = t;
    const double decay = std::exp(-dt / noise.offset_tau_s);
    const double keep = std::sqrt(1.0 - decay * decay);
    ox = ox * decay + noise.offset_x * keep * n01(rng);
    oy = oy * decay + noise.offset_y * keep * n01(rng);
    const double jx = noise.jitter_x * n01(rng), jy = noise.jitter_y * n01(rng);
    const bool dropped = u(rng) < noise.dropout;
    if (dropped) continue;
    auto [x, y] = path.position(t);
    x += ox + jx + drift * t * std::cos(angle);
    y += oy + jy + drift * t * std::sin(angle);
    while (blink < blinks.size() && blinks[blink].first + 100.0 < t) ++blink;
    if (blink < blinks.size() && blinks[blink].first <= t) y += blinks[blink].second;
    out.push_back({t, x, y, noise.kind});
    last_t = t;
  }
  return out;
}

GazeStream simulate_gaze(const DocumentLayout& layout, const std::vector<bool>& labels,
                         const UserProfile& profile, const NoiseModel& noise,
                         std::uint64_t seed) {
  const Scanpath path = plan_scanpath(layout, labels, profile, derive_seed(seed, "path"));
  return render_gaze(path, noise, derive_seed(seed, "noise"));
}

nlohmann::json SynthConfig::to_json() const {
  return {{"corpus", corpus.to_json()},
          {"n_users", n_users},
          {"n_groups", n_groups},
          {"proficiency", {proficiency_min, proficiency_max}},
          {"label_noise", label_noise},
          {"dwell_gain", dwell_gain},
          {"regression_prob", regression_prob},
          {"tracker", tracker.to_json()},
          {"webcam", webcam.to_json()},
          {"emit_webcam", emit_webcam}};
}

std::vector<UserProfile> make_users(const SynthConfig& config) {
  std::vector<UserProfile> users;
  const double lo = config.proficiency_min, hi = config.proficiency_max;
  for (std::size_t i = 0; i < config.n_users; ++i) {
    // Spread proficiencies log-uniformly; interleave so every group spans the range.
    const double q = (double(i) + 0.5) / double(config.n_users);
    UserProfile p;
    char id[16];
    std::snprintf(id, sizeof id, "u%zu", i);
    p.user_id = id;
    p.proficiency = lo * std::pow(hi / lo, q);
    p.label_noise = config.label_noise;
    p.dwell_gain = config.dwell_gain;
    p.regression_prob = config.regression_prob;
    users.push_back(p);
  }
  return users;
}

std::vector<std::size_t> docs_for_user(const SynthConfig& config, std::size_t user_index) {
  const std::size_t groups = std::max<std::size_t>(1, config.n_groups);
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < config.corpus.n_docs; ++d) {
    if (d % groups == user_index % groups) out.push_back(d);
  }
  return out;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a(bytes);
}

nlohmann::json export_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "layouts", ec);
  fs::create_directories(out_dir / "gaze" / "tracker", ec);
  if (config.emit_webcam) fs::create_directories(out_dir / "gaze" / "webcam", ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  const Corpus corpus = gen_corpus(config.corpus);
  const auto users = make_users(config);
  std::map<std::string, std::string> files;
  auto record = [&](const fs::path& rel) {
    files[rel.generic_string()] = hex(file_hash(out_dir / rel));
  };
  auto open = [&](const fs::path& rel) {
    std::ofstream out(out_dir / rel, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / rel).string());
    return out;
  };

  for (const auto& doc : corpus.docs) {
    const fs::path rel = fs::path("layouts") / (doc.doc_id + ".json");
    text::write_layout(out_dir / rel, doc);
    record(rel);
  }
  {
    auto out = open("lexicon.json");
    out << nlohmann::json{{"words", corpus.lexicon.words}}.dump() << '\n';
  }
  record("lexicon.json");
  {
    nlohmann::json uj = nlohmann::json::array();
    for (const auto& u : users) uj.push_back(u.to_json());
    auto out = open("users.json");
    out << uj.dump() << '\n';
  }
  record("users.json");

  std::size_t n_sessions = 0, n_labels = 0, n_unknown = 0, n_gaze = 0, n_samples = 0;
  {
    auto labels_out = open("labels.jsonl");
    for (std::size_t ui = 0; ui < users.size(); ++ui) {
      const auto& user = users[ui];
      for (std::size_t d : docs_for_user(config, ui)) {
        const auto& doc = corpus.docs[d];
        const std::string key = user.user_id + "_" + doc.doc_id;
        const auto labels = assign_labels(user, doc, corpus.lexicon,
                                          derive_seed(config.seed(), "labels/" + key));
        for (std::size_t i = 0; i < labels.size(); ++i) {
          labels_out << nlohmann::json{{"user_id", user.user_id},
                                       {"doc_id", doc.doc_id},
                                       {"word_index", i},
                                       {"unknown", bool(labels[i])}}
                            .dump()
                     << '\n';
          n_unknown += labels[i];
        }
        n_labels += labels.size();
        const Scanpath path =
            plan_scanpath(doc, labels, user, derive_seed(config.seed(), "path/" + key));
        std::vector<std::pair<std::string, const NoiseModel*>> kinds = {{"tracker", &config.tracker}};
        if (config.emit_webcam) kinds.emplace_back("webcam", &config.webcam);
        for (const auto& [kind, model] : kinds) {
          const auto stream =
              render_gaze(path, *model, derive_seed(config.seed(), "noise/" + kind + "/" + key));
          const fs::path rel = fs::path("gaze") / kind / (key + ".jsonl");
          gaze::write_gaze_jsonl(out_dir / rel, stream);
          record(rel);
          ++n_gaze;
          n_samples += stream.size();
        }
        ++n_sessions;
      }
    }
  }
  record("labels.jsonl");

  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, v] : files) h = fnv1a(k + "=" + v + "\n", h);
  nlohmann::json manifest = {
      {"seed", config.seed()},
      {"config", config.to_json()},
      {"counts",
       {{"users", users.size()},
        {"docs", corpus.docs.size()},
        {"sessions", n_sessions},
        {"labels", n_labels},
        {"unknown_labels", n_unknown},
        {"gaze_files", n_gaze},
        {"gaze_samples", n_samples}}},
      {"files", files},
      {"hash", hex(h)}};
  auto out = open("manifest.json");
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace gazelex::synth

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


#include "gazelex/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "gazelex/gaze/io.hpp"
#include "gazelex/gaze/pipeline.hpp"

namespace gazelex::data {
namespace {

using gaze::GazeSample;

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

// Indices of at most `cap` evenly spaced elements out of n.
std::vector<std::size_t> thin(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (n <= cap) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  for (std::size_t i = 0; i < cap; ++i) idx.push_back(i * n / cap);
  return idx;
}

}  // namespace

void Dataset::append(Dataset other) {
  const std::size_t base = windows.size();
  for (auto& w : other.windows) windows.push_back(std::move(w));
  for (auto& s : other.samples) {
    s.record += base;
    samples.push_back(std::move(s));
  }
  stats.accepted += other.stats.accepted;
  stats.rejected_unstable += other.stats.rejected_unstable;
  stats.rejected_empty += other.stats.rejected_empty;
  stats.without_candidates += other.stats.without_candidates;
}

nlohmann::json BuildConfig::to_json() const {
  return {{"max_tokens", max_tokens},       {"max_gaze_len", max_gaze_len},
          {"context_words", context_words}, {"smoothing", smoothing},
          {"screen_width", screen_width},   {"screen_height", screen_height}};
}

BuildConfig BuildConfig::from_json(const nlohmann::json& j) {
  BuildConfig c;
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.max_gaze_len = j.value("max_gaze_len", c.max_gaze_len);
  c.context_words = j.value("context_words", c.context_words);
  c.smoothing = j.value("smoothing", c.smoothing);
  c.screen_width = j.value("screen_width", c.screen_width);
  c.screen_height = j.value("screen_height", c.screen_height);
  return c;
}

WindowBuilder::WindowBuilder(const text::DocumentLayout& layout, const TextResources& text,
                             BuildConfig config)
    : layout_(layout), config_(config), words_(layout.words.size()), prefix_(layout.words.size() + 1, 0) {
  for (std::size_t i = 0; i < layout.words.size(); ++i) {
    words_[i].tokens = text::tokenize(layout.words[i], text.vocab);
    words_[i].knowledge = text::knowledge_features(layout, i, text.freq);
    if (words_[i].tokens.size() > config.max_tokens) {
      throw DatasetError("word '" + layout.words[i].text + "' has more tokens than a row holds");
    }
    prefix_[i + 1] = prefix_[i] + words_[i].tokens.size();
  }
}

std::pair<double, double> WindowBuilder::raw_span(std::size_t index) {
  const double start = double(index) * kWindowMs;
  return {start - kWindowMs - kMarginMs, start + 2 * kWindowMs + kMarginMs};
}

gaze::WindowStatus WindowBuilder::build(std::span<const GazeSample> raw, std::size_t index,
                                        const WordLabels* labels, const std::string& user_id,
                                        Dataset& out) const {
  const auto [from, to] = raw_span(index);
  auto lower = [&](double t) {
    return std::lower_bound(raw.begin(), raw.end(), t,
                            [](const GazeSample& s, double v) { return s.t_ms < v; });
  };
  const std::span<const GazeSample> slice(lower(from), lower(to));
  const std::vector<GazeSample> prepared = gaze::prepare_stream(slice, config_.smoothing);
  const auto win = gaze::reject_or_denoise(gaze::cut_window(prepared, index, kWindowMs),
                                           layout_.line_height);
  if (win.status == gaze::WindowStatus::kRejectedUnstable) {
    ++out.stats.rejected_unstable;
    return win.status;
  }
  if (win.status == gaze::WindowStatus::kRejectedEmpty) {
    ++out.stats.rejected_empty;
    return win.status;
  }
  ++out.stats.accepted;
  const auto cands = text::candidate_words(layout_, gaze::region_of_interest(win));
  if (cands.empty()) {
    ++out.stats.without_candidates;
    return win.status;
  }
  if (labels != nullptr) {
    for (std::size_t c : cands) {
      if (c >= labels->size() || !(*labels)[c].has_value()) {
        throw DatasetError("missing label for word " + std::to_string(c) + " '" +
                           layout_.words[c].text + "' of " + user_id + "/" + layout_.doc_id);
      }
    }
  }
  auto span_tokens = [&](std::size_t a, std::size_t b) { return prefix_[b + 1] - prefix_[a]; };
  const double diag = std::hypot(config_.screen_width, config_.screen_height);

  const auto& ext = win.extended_samples;
  const auto smooth = gaze::moving_average(ext, config_.smoothing);
  std::vector<std::array<double, 4>> gz;
  std::vector<double> gt;
  for (std::size_t i : thin(ext.size(), config_.max_gaze_len)) {
    gz.push_back({smooth[i].x / config_.screen_width, smooth[i].y / config_.screen_height,
                  ext[i].x / config_.screen_width, ext[i].y / config_.screen_height});
    gt.push_back((ext[i].t_ms - ext.front().t_ms) * 60.0 / 1000.0);
  }
  const double n_g = double(ext.size());
  const gaze::Source source = raw.empty() ? gaze::Source::kTracker : raw.front().source;

  std::size_t part = 0;
  for (std::size_t ci = 0; ci < cands.size();) {
    std::size_t cj = ci;
    while (cj + 1 < cands.size() && span_tokens(cands[ci], cands[cj + 1]) <= config_.max_tokens) {
      ++cj;
    }
    std::size_t a = cands[ci], b = cands[cj];
    std::size_t used = span_tokens(a, b);
    for (std::size_t k = 0; k < config_.context_words; ++k) {
      if (a > 0 && used + words_[a - 1].tokens.size() <= config_.max_tokens) {
        --a;
        used += words_[a].tokens.size();
      }
      if (b + 1 < words_.size() && used + words_[b + 1].tokens.size() <= config_.max_tokens) {
        ++b;
        used += words_[b].tokens.size();
      }
    }

    WindowRecord rec;
    rec.user_id = user_id;
    rec.doc_id = layout_.doc_id;
    rec.source = source;
    rec.window_index = win.index;
    rec.part = part++;
    rec.gaze = gz;
    rec.gaze_time = gt;
    std::vector<std::size_t> first_slot(b - a + 1);
    for (std::size_t w = a; w <= b; ++w) {
      first_slot[w - a] = rec.tokens.size();
      const auto& kn = words_[w].knowledge;
      for (const auto& tok : words_[w].tokens) {
        TokenRecord t;
        t.word_index = w;
        t.token_id = tok.token_id;
        t.feats = {tok.box.center_x() / config_.screen_width,
                   tok.box.center_y() / config_.screen_height,
                   gaze::gaze_token_distance(ext, tok.box) / diag,
                   double(gaze::gaze_duration(ext, tok.box)) / n_g};
        t.tf_bin = kn.tf_bin;
        t.pos = static_cast<std::int64_t>(kn.pos);
        t.ner = static_cast<std::int64_t>(kn.ner);
        t.log_tf = kn.log_term_frequency;
        rec.tokens.push_back(t);
      }
    }
    const std::size_t record = out.windows.size();
    for (std::size_t k = ci; k <= cj; ++k) {
      const std::size_t w = cands[k];
      const auto& box = layout_.words[w].box;
      LabeledSample s;
      s.record = record;
      s.word_index = w;
      s.unknown = labels != nullptr && *(*labels)[w];
      s.distance = gaze::gaze_token_distance(ext, box);
      s.duration = double(gaze::gaze_duration(ext, box));
      s.n_g = ext.size();
      s.log_tf = words_[w].knowledge.log_term_frequency;
      s.pos = static_cast<int>(words_[w].knowledge.pos);
      s.ner = static_cast<int>(words_[w].knowledge.ner);
      for (std::size_t j = 0; j < words_[w].tokens.size(); ++j) {
        s.token_slots.push_back(first_slot[w - a] + j);
      }
      out.samples.push_back(std::move(s));
    }
    out.windows.push_back(std::move(rec));
    ci = cj + 1;
  }
  return win.status;
}

std::size_t stream_window_count(std::span<const GazeSample> stream) {
  if (stream.empty()) return 0;
  return gaze::window_count(stream.back().t_ms + gaze::median_interval(stream),
                            WindowBuilder::kWindowMs);
}

Dataset build_samples(std::span<const GazeSample> stream, const text::DocumentLayout& layout,
                      const WordLabels& labels, const TextResources& text,
                      const std::string& user_id, const BuildConfig& config) {
  Dataset out;
  if (stream.empty()) return out;
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].t_ms < stream[i - 1].t_ms) {
      throw std::invalid_argument("gaze stream is not timestamp-sorted");
    }
  }
  const WindowBuilder builder(layout, text, config);
  const std::size_t count = stream_window_count(stream);
  for (std::size_t k = 0; k < count; ++k) builder.build(stream, k, &labels, user_id, out);
  return out;
}

const char* to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::kMixed:
      return "mixed";
    case SplitMode::kCrossUser:
      return "cross_user";
    case SplitMode::kCrossDocument:
      return "cross_document";
  }
  return "?";
}

SplitMode split_mode_from_string(std::string_view name) {
  if (name == "mixed") return SplitMode::kMixed;
  if (name == "cross_user") return SplitMode::kCrossUser;
  if (name == "cross_document") return SplitMode::kCrossDocument;
  throw std::invalid_argument("unknown split mode '" + std::string(name) + "'");
}

void SplitSpec::validate() const {
  if (mode == SplitMode::kMixed) {
    if (!(train_ratio > 0 && dev_ratio > 0 && train_ratio + dev_ratio < 1)) {
      throw std::invalid_argument("split ratios must be positive and leave room for test");
    }
    return;
  }
  if (dev_ids.empty() || test_ids.empty()) {
    throw std::invalid_argument("cross splits need dev and test ids");
  }
  for (const auto& id : dev_ids) {
    if (std::find(test_ids.begin(), test_ids.end(), id) != test_ids.end()) {
      throw std::invalid_argument("id '" + id + "' is both dev and test");
    }
  }
}

nlohmann::json SplitSpec::to_json() const {
  return {{"mode", to_string(mode)},   {"train_ratio", train_ratio}, {"dev_ratio", dev_ratio},
          {"dev_ids", dev_ids},        {"test_ids", test_ids},       {"seed", seed}};
}

nlohmann::json Split::manifest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* part : {&train, &dev, &test}) {
    for (std::size_t i : *part) h = fnv1a(std::to_string(i) + ",", h);
    h = fnv1a("|", h);
  }
  return {{"spec", spec.to_json()},
          {"counts", {{"train", train.size()}, {"dev", dev.size()}, {"test", test.size()}}},
          {"hash", hex(h)}};
}

SplitSpec default_split_spec(const Dataset& dataset, SplitMode mode, std::uint64_t seed) {
  SplitSpec spec;
  spec.mode = mode;
  spec.seed = seed;
  if (mode == SplitMode::kMixed) return spec;
  std::set<std::string> keys;
  for (const auto& rec : dataset.windows) {
    keys.insert(mode == SplitMode::kCrossUser ? rec.user_id : rec.doc_id);
  }
  std::vector<std::string> ids(keys.begin(), keys.end());
  const std::size_t k = (ids.size() + 9) / 10;
  if (ids.size() < 2 * k + 1) {
    throw DatasetError(std::string(to_string(mode)) + " split needs at least " +
                       std::to_string(2 * k + 1) + " distinct ids, found " +
                       std::to_string(ids.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  spec.test_ids.assign(ids.begin(), ids.begin() + k);
  spec.dev_ids.assign(ids.begin() + k, ids.begin() + 2 * k);
  return spec;
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  Split out;
  out.spec = spec;
  const std::size_t n = dataset.samples.size();
  if (spec.mode == SplitMode::kMixed) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(spec.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(double(n) * spec.train_ratio));
    const auto n_dev = static_cast<std::size_t>(std::llround(double(n) * spec.dev_ratio));
    out.train.assign(ids.begin(), ids.begin() + std::min(n, n_train));
    out.dev.assign(ids.begin() + std::min(n, n_train), ids.begin() + std::min(n, n_train + n_dev));
    out.test.assign(ids.begin() + std::min(n, n_train + n_dev), ids.end());
  } else {
    const std::set<std::string> dev(spec.dev_ids.begin(), spec.dev_ids.end());
    const std::set<std::string> test(spec.test_ids.begin(), spec.test_ids.end());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = dataset.record_of(dataset.samples[i]);
      const std::string& key = spec.mode == SplitMode::kCrossUser ? rec.user_id : rec.doc_id;
      (test.contains(key) ? out.test : dev.contains(key) ? out.dev : out.train).push_back(i);
    }
  }
  for (auto* part : {&out.train, &out.dev, &out.test}) std::sort(part->begin(), part->end());
  if (out.train.empty() || out.dev.empty() || out.test.empty()) {
    throw DatasetError(std::string(to_string(spec.mode)) + " split leaves an empty part (" +
                       std::to_string(out.train.size()) + "/" + std::to_string(out.dev.size()) +
                       "/" + std::to_string(out.test.size()) + ")");
  }
  return out;
}

Imbalance class_imbalance(const Dataset& dataset, std::span<const std::size_t> ids) {
  Imbalance out;
  auto add = [&](const LabeledSample& s) {
    (s.unknown ? out.positive_tokens : out.negative_tokens) += s.token_slots.size();
  };
  if (ids.empty()) {
    for (const auto& s : dataset.samples) add(s);
  } else {
    for (std::size_t i : ids) add(dataset.samples.at(i));
  }
  if (out.positive_tokens == 0) {
    std::cerr << "warning: no positive tokens, imbalance ratio is infinite\n";
    out.ratio = std::numeric_limits<double>::infinity();
  } else {
    out.ratio = double(out.negative_tokens) / double(out.positive_tokens);
  }
  return out;
}

std::vector<RowRef> group_rows(const Dataset& dataset, std::span<const std::size_t> ids) {
  std::map<std::size_t, std::vector<std::size_t>> by_record;
  for (std::size_t i : ids) by_record[dataset.samples.at(i).record].push_back(i);
  std::vector<RowRef> rows;
  rows.reserve(by_record.size());
  for (auto& [rec, samples] : by_record) rows.push_back({rec, std::move(samples)});
  return rows;
}

model::WindowBatch make_batch(const Dataset& dataset, std::span<const RowRef> rows) {
  std::size_t lg = 1, t = 1;
  for (const auto& r : rows) {
    const auto& rec = dataset.windows.at(r.record);
    lg = std::max(lg, rec.gaze.size());
    t = std::max(t, rec.tokens.size());
  }
  auto batch = model::WindowBatch::empty(rows.size(), lg, t);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto& rec = dataset.windows[rows[b].record];
    for (std::size_t i = 0; i < rec.gaze.size(); ++i) {
      for (std::size_t c = 0; c < 4; ++c) batch.gaze[(b * lg + i) * 4 + c] = rec.gaze[i][c];
      batch.gaze_time[b * lg + i] = rec.gaze_time[i];
      batch.gaze_mask[b * lg + i] = 1.0;
    }
    for (std::size_t j = 0; j < rec.tokens.size(); ++j) {
      const auto& tok = rec.tokens[j];
      const std::size_t k = b * t + j;
      for (std::size_t c = 0; c < 4; ++c) batch.token_feats[k * 4 + c] = tok.feats[c];
      batch.token_ids[k] = tok.token_id;
      batch.tf_bin[k] = tok.tf_bin;
      batch.pos[k] = tok.pos;
      batch.ner[k] = tok.ner;
      batch.log_tf[k] = tok.log_tf;
      batch.token_mask[k] = 1.0;
    }
    for (std::size_t si : rows[b].samples) {
      const auto& s = dataset.samples.at(si);
      if (s.record != rows[b].record) throw DatasetError("sample grouped under a foreign record");
      for (std::size_t slot : s.token_slots) {
        batch.loss_mask[b * t + slot] = 1.0;
        batch.labels[b * t + slot] = s.unknown ? 1.0 : 0.0;
      }
    }
  }
  return batch;
}

namespace {

nlohmann::json record_json(const WindowRecord& r) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : r.tokens) {
    tokens.push_back({{"w", t.word_index}, {"id", t.token_id}, {"f", t.feats},
                      {"tf", t.tf_bin},    {"pos", t.pos},     {"ner", t.ner},
                      {"ltf", t.log_tf}});
  }
  return {{"user_id", r.user_id},
          {"doc_id", r.doc_id},
          {"source", gaze::to_string(r.source)},
          {"window_index", r.window_index},
          {"part", r.part},
          {"gaze", r.gaze},
          {"gaze_time", r.gaze_time},
          {"tokens", tokens}};
}

WindowRecord record_from(const nlohmann::json& j) {
  WindowRecord r;
  r.user_id = j.at("user_id").get<std::string>();
  r.doc_id = j.at("doc_id").get<std::string>();
  r.source = gaze::source_from_string(j.at("source").get<std::string>());
  r.window_index = j.at("window_index").get<std::size_t>();
  r.part = j.at("part").get<std::size_t>();
  r.gaze = j.at("gaze").get<std::vector<std::array<double, 4>>>();
  r.gaze_time = j.at("gaze_time").get<std::vector<double>>();
  for (const auto& t : j.at("tokens")) {
    TokenRecord tok;
    tok.word_index = t.at("w").get<std::size_t>();
    tok.token_id = t.at("id").get<std::int64_t>();
    tok.feats = t.at("f").get<std::array<double, 4>>();
    tok.tf_bin = t.at("tf").get<std::int64_t>();
    tok.pos = t.at("pos").get<std::int64_t>();
    tok.ner = t.at("ner").get<std::int64_t>();
    tok.log_tf = t.at("ltf").get<double>();
    r.tokens.push_back(tok);
  }
  return r;
}

nlohmann::json sample_json(const LabeledSample& s) {
  return {{"record", s.record}, {"word", s.word_index}, {"unknown", s.unknown},
          {"d", s.distance},    {"t", s.duration},      {"n_g", s.n_g},
          {"log_tf", s.log_tf}, {"pos", s.pos},         {"ner", s.ner},
          {"slots", s.token_slots}};
}

LabeledSample sample_from(const nlohmann::json& j) {
  LabeledSample s;
  s.record = j.at("record").get<std::size_t>();
  s.word_index = j.at("word").get<std::size_t>();
  s.unknown = j.at("unknown").get<bool>();
  s.distance = j.at("d").get<double>();
  s.duration = j.at("t").get<double>();
  s.n_g = j.at("n_g").get<std::size_t>();
  s.log_tf = j.at("log_tf").get<double>();
  s.pos = j.at("pos").get<int>();
  s.ner = j.at("ner").get<int>();
  s.token_slots = j.at("slots").get<std::vector<std::size_t>>();
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path.string());
  return in;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const nlohmann::json& manifest_extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DatasetError("cannot create " + dir.string() + ": " + ec.message());
  std::uint64_t h = 1469598103934665603ULL;
  {
    auto out = open_out(dir / "windows.jsonl");
    for (const auto& r : dataset.windows) {
      const auto line = record_json(r).dump() + "\n";
      h = fnv1a(line, h);
      out << line;
    }
  }
  {
    auto out = open_out(dir / "samples.jsonl");
    for (const auto& s : dataset.samples) {
      const auto line = sample_json(s).dump() + "\n";
      h = fnv1a(line, h);
      out << line;
    }
  }
  const auto imb = class_imbalance(dataset);
  nlohmann::json manifest = {
      {"counts",
       {{"windows", dataset.windows.size()},
        {"samples", dataset.samples.size()},
        {"accepted", dataset.stats.accepted},
        {"rejected_unstable", dataset.stats.rejected_unstable},
        {"rejected_empty", dataset.stats.rejected_empty},
        {"without_candidates", dataset.stats.without_candidates}}},
      {"imbalance",
       {{"negative_tokens", imb.negative_tokens},
        {"positive_tokens", imb.positive_tokens},
        {"ratio", std::isfinite(imb.ratio) ? nlohmann::json(imb.ratio) : nlohmann::json()}}},
      {"hash", hex(h)}};
  if (manifest_extra.is_object()) manifest.update(manifest_extra);
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  {
    auto in = open_in(dir / "windows.jsonl");
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) ds.windows.push_back(record_from(nlohmann::json::parse(line)));
    }
  }
  {
    auto in = open_in(dir / "samples.jsonl");
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      auto s = sample_from(nlohmann::json::parse(line));
      if (s.record >= ds.windows.size()) throw DatasetError("sample refers to a missing record");
      ds.samples.push_back(std::move(s));
    }
  }
  auto in = open_in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  const auto& c = m.at("counts");
  ds.stats.accepted = c.value("accepted", std::size_t{0});
  ds.stats.rejected_unstable = c.value("rejected_unstable", std::size_t{0});
  ds.stats.rejected_empty = c.value("rejected_empty", std::size_t{0});
  ds.stats.without_candidates = c.value("without_candidates", std::size_t{0});
  return ds;
}

const text::DocumentLayout& SourceData::doc(const std::string& doc_id) const {
  for (const auto& d : docs) {
    if (d.doc_id == doc_id) return d;
  }
  throw DatasetError("unknown document '" + doc_id + "'");
}

SourceData load_export(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  SourceData src;
  std::vector<fs::path> layout_files;
  if (!fs::is_directory(dir / "layouts")) throw DatasetError("no layouts under " + dir.string());
  for (const auto& e : fs::directory_iterator(dir / "layouts")) {
    if (e.path().extension() == ".json") layout_files.push_back(e.path());
  }
  std::sort(layout_files.begin(), layout_files.end());
  for (const auto& p : layout_files) src.docs.push_back(text::read_layout(p));
  {
    auto in = open_in(dir / "users.json");
    for (const auto& u : nlohmann::json::parse(in)) {
      src.users.push_back(u.at("user_id").get<std::string>());
    }
  }
  std::map<std::pair<std::string, std::string>, WordLabels> labels;
  {
    auto in = open_in(dir / "labels.jsonl");
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      auto& wl = labels[{j.at("user_id").get<std::string>(), j.at("doc_id").get<std::string>()}];
      const auto i = j.at("word_index").get<std::size_t>();
      if (wl.size() <= i) wl.resize(i + 1);
      wl[i] = j.at("unknown").get<bool>();
    }
  }
  for (const auto& user : src.users) {
    for (const auto& doc : src.docs) {
      auto it = labels.find({user, doc.doc_id});
      if (it == labels.end()) continue;
      Session s;
      s.user_id = user;
      s.doc_id = doc.doc_id;
      s.labels = std::move(it->second);
      s.labels.resize(doc.words.size());
      const std::string name = user + "_" + doc.doc_id + ".jsonl";
      s.tracker = gaze::read_gaze_jsonl(dir / "gaze" / "tracker" / name);
      if (fs::exists(dir / "gaze" / "webcam" / name)) {
        s.webcam = gaze::read_gaze_jsonl(dir / "gaze" / "webcam" / name);
      }
      src.sessions.push_back(std::move(s));
    }
  }
  return src;
}

Dataset build_dataset(const SourceData& source, gaze::Source kind, const TextResources& text,
                      const BuildConfig& config) {
  Dataset out;
  for (const auto& s : source.sessions) {
    const auto& stream = kind == gaze::Source::kWebcam ? s.webcam : s.tracker;
    if (stream.empty()) {
      throw DatasetError("session " + s.user_id + "/" + s.doc_id + " has no " +
                         std::string(gaze::to_string(kind)) + " stream");
    }
    out.append(build_samples(stream, source.doc(s.doc_id), s.labels, text, s.user_id, config));
  }
  return out;
}

}  // namespace gazelex::data

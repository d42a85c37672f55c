// Copyright 2026 The eyepad Authors
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

#include "eyepad/cli/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"
#include "eyepad/models/snapshot.hpp"

namespace eyepad::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Reads typed keys from one config section and rejects the rest.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    const json& j = root.at(name_);
    if (!j.is_object()) throw ConfigError(name_ + ": expected an object");
    obj_ = &j;
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    target = convert<T>(obj_->at(key), key);
  }

  template <typename T>
  void read(const char* key, std::optional<T>& target) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    target = convert<T>(obj_->at(key), key);
  }

  template <typename T, typename Parse>
  void read_enum(const char* key, T& target, Parse parse) {
    std::string text;
    read(key, text);
    if (!obj_ || !obj_->contains(key)) return;
    try {
      target = parse(text);
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
  }

 private:
  std::string where(const std::string& key) const { return name_ + "." + key; }

  template <typename T>
  T convert(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where(key) + ": expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
      return v.get<std::string>();
    } else {
      // std::vector<E>
      if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], key + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

data::DatasetBundle require_bundle(const ExperimentConfig& cfg) {
  const auto dir = cfg.resolved_bundle_dir();
  if (!data::bundle_exists(dir)) {
    throw MissingInputError("no dataset bundle in '" + dir.string() + "'; run 'generate' first");
  }
  return data::load_bundle(dir);
}

train::TrainConfig train_config_for(const ExperimentConfig& cfg, const data::DatasetBundle& bundle,
                                    std::uint64_t seed) {
  auto t = cfg.train;
  t.seed = seed;
  t.degradation = bundle.config.degradation;
  return t;
}

fs::path save_model(const ExperimentConfig& cfg, const models::EmbeddingModel& model, train::Strategy strategy,
                    const train::TrainConfig& t) {
  const models::SnapshotMetadata meta{std::string(train::to_string(strategy)), t.epochs, t.seed};
  return models::save_snapshot(model, meta, models::snapshot_stem(cfg.output_dir, meta));
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0 : s / static_cast<double>(v.size());
}

bool is_single_task(train::Strategy s) { return s == train::Strategy::ea_only || s == train::Strategy::pad_only; }

}  // namespace

std::uint64_t ExperimentConfig::resolved_data_seed() const {
  return data_seed ? *data_seed : io::derive_seed(master_seed(), "data");
}

std::uint64_t ExperimentConfig::resolved_eval_seed() const {
  return eval_seed ? *eval_seed : io::derive_seed(master_seed(), "eval");
}

std::vector<std::uint64_t> ExperimentConfig::resolved_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{master_seed()} : seeds;
}

fs::path ExperimentConfig::resolved_bundle_dir() const {
  return bundle_dir.empty() ? output_dir / "bundle" : bundle_dir;
}

void ExperimentConfig::set_master_seed(std::uint64_t seed) { train.seed = seed; }

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object with sections data, train, eval, output");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> sections{"data", "train", "eval", "output"};
    if (!sections.count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  ExperimentConfig cfg;

  Section d(j, "data");
  auto& dc = cfg.data;
  d.read("n_train_users", dc.n_train_users);
  d.read("n_test_users", dc.n_test_users);
  d.read("train_images_per_side", dc.train_images_per_side);
  d.read("query_per_side", dc.query_per_side);
  d.read("gallery_per_side", dc.gallery_per_side);
  d.read("pad_train_users", dc.pad_train_users);
  d.read("pad_test_users", dc.pad_test_users);
  d.read("pad_live_per_user", dc.pad_live_per_user);
  d.read("pad_lens_per_user", dc.pad_lens_per_user);
  d.read("pad_print_per_user", dc.pad_print_per_user);
  d.read("height", dc.height);
  d.read("width", dc.width);
  d.read("noise_scale", dc.noise_scale);
  d.read("max_shift", dc.max_shift);
  d.read("max_rotation", dc.max_rotation);
  d.read("gain_jitter", dc.gain_jitter);
  d.read("lens_amplitude", dc.lens_amplitude);
  d.read("lens_amplitude_min", dc.lens_amplitude_min);
  d.read("ea_lens_fraction", dc.ea_lens_fraction);
  d.read("min_separation", dc.min_separation);
  d.read_enum("degradation", dc.degradation, data::degradation_from_string);
  d.read_enum("ea_train_sides", dc.ea_train_sides, data::train_sides_from_string);
  d.read("seed", cfg.data_seed);
  d.finish();

  Section t(j, "train");
  bool reference = false;
  std::string preset_name(models::to_string(cfg.train.preset));
  t.read("preset", preset_name);
  t.read("reference_defaults", reference);
  try {
    cfg.train.preset = models::preset_from_string(preset_name);
  } catch (const Error& e) {
    throw ConfigError(std::string("train.preset: ") + e.what());
  }
  if (reference) cfg.train = train::TrainConfig::defaults_for(cfg.train.preset, dc.degradation);
  auto& tc = cfg.train;
  tc.degradation = dc.degradation;
  t.read_enum("strategy", tc.strategy, train::strategy_from_string);
  t.read("epochs", tc.epochs);
  t.read("batch_size", tc.batch_size);
  t.read("samples_per_class", tc.samples_per_class);
  t.read_enum("optimizer", tc.optimizer, [](const std::string& s) {
    try {
      return ad::optimizer_kind_from_string(s);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  });
  t.read("lr", tc.lr);
  t.read("gamma", tc.gamma);
  t.read("decay_after", tc.decay_after);
  t.read("seed", tc.seed);
  t.read("feature_dim", tc.feature_dim);
  t.read("alpha", tc.weights.alpha);
  t.read("lambda1", tc.weights.lambda1);
  t.read("lambda2", tc.weights.lambda2);
  t.read("lambda_auth", tc.weights.lambda_auth);
  t.read("lambda_pad", tc.weights.lambda_pad);
  t.read("seeds", cfg.seeds);
  t.read("lambda1_grid", cfg.lambda1_grid);
  t.finish();

  Section e(j, "eval");
  e.read("ks", cfg.eval.ks);
  e.read("far_targets", cfg.eval.far_targets);
  e.read("runs", cfg.eval.runs);
  e.read("fdr", cfg.eval.fdr);
  e.read("sar", cfg.eval.sar);
  e.read("eye_to_eye", cfg.eval.eye_to_eye);
  e.read("seed", cfg.eval_seed);
  e.finish();

  Section o(j, "output");
  std::string dir = cfg.output_dir.string();
  std::optional<std::string> bundle;
  o.read("dir", dir);
  o.read("bundle", bundle);
  o.finish();
  cfg.output_dir = resolve(base_dir, dir);
  if (bundle) cfg.bundle_dir = resolve(base_dir, *bundle);

  dc.validate();
  try {
    tc.validate();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  cfg.eval.validate();
  if (cfg.lambda1_grid.empty()) throw ConfigError("train.lambda1_grid must not be empty");
  for (double l : cfg.lambda1_grid)
    if (!(l >= 0)) throw ConfigError("train.lambda1_grid entries must be >= 0");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInputError("config file '" + path.string() + "' not found");
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& dc = cfg.data;
  const auto& tc = cfg.train;
  json j;
  j["data"] = {{"n_train_users", dc.n_train_users},
               {"n_test_users", dc.n_test_users},
               {"train_images_per_side", dc.train_images_per_side},
               {"query_per_side", dc.query_per_side},
               {"gallery_per_side", dc.gallery_per_side},
               {"pad_train_users", dc.pad_train_users},
               {"pad_test_users", dc.pad_test_users},
               {"pad_live_per_user", dc.pad_live_per_user},
               {"pad_lens_per_user", dc.pad_lens_per_user},
               {"pad_print_per_user", dc.pad_print_per_user},
               {"height", dc.height},
               {"width", dc.width},
               {"noise_scale", dc.noise_scale},
               {"max_shift", dc.max_shift},
               {"max_rotation", dc.max_rotation},
               {"gain_jitter", dc.gain_jitter},
               {"lens_amplitude", dc.lens_amplitude},
               {"lens_amplitude_min", dc.lens_amplitude_min},
               {"ea_lens_fraction", dc.ea_lens_fraction},
               {"min_separation", dc.min_separation},
               {"degradation", data::to_string(dc.degradation)},
               {"ea_train_sides", data::to_string(dc.ea_train_sides)},
               {"seed", cfg.resolved_data_seed()}};
  j["train"] = {{"strategy", train::to_string(tc.strategy)},
                {"epochs", tc.epochs},
                {"batch_size", tc.batch_size},
                {"samples_per_class", tc.samples_per_class},
                {"optimizer", ad::to_string(tc.optimizer)},
                {"lr", tc.lr},
                {"gamma", tc.gamma},
                {"decay_after", tc.decay_after},
                {"seed", tc.seed},
                {"preset", models::to_string(tc.preset)},
                {"feature_dim", tc.feature_dim},
                {"alpha", tc.weights.alpha},
                {"lambda1", tc.weights.lambda1},
                {"lambda2", tc.weights.lambda2},
                {"lambda_auth", tc.weights.lambda_auth},
                {"lambda_pad", tc.weights.lambda_pad},
                {"seeds", cfg.resolved_seeds()},
                {"lambda1_grid", cfg.lambda1_grid}};
  j["eval"] = {{"ks", cfg.eval.ks},     {"far_targets", cfg.eval.far_targets}, {"runs", cfg.eval.runs},
               {"fdr", cfg.eval.fdr},   {"sar", cfg.eval.sar},                 {"eye_to_eye", cfg.eval.eye_to_eye},
               {"seed", cfg.resolved_eval_seed()}};
  j["output"] = {{"dir", cfg.output_dir.string()}, {"bundle", cfg.resolved_bundle_dir().string()}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a(config_to_json(cfg).dump())); }

data::DatasetBundle cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
  auto dc = cfg.data;
  dc.seed = cfg.resolved_data_seed();
  auto bundle = data::build_bundle(dc);
  const auto dir = cfg.resolved_bundle_dir();
  data::save_bundle(bundle, dir);
  const auto c = bundle.counts();
  log << "bundle " << dir.string() << " (" << data::to_string(dc.degradation) << ", seed " << dc.seed << ")\n"
      << "  ea_train   " << c.ea_train << "\n"
      << "  ea_query   " << c.ea_query << "\n"
      << "  ea_gallery " << c.ea_gallery << "\n"
      << "  pad_train  " << c.pad_train << "\n"
      << "  pad_test   " << c.pad_test << "\n";
  return bundle;
}

TrainArtifacts cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const auto bundle = require_bundle(cfg);
  const auto t = train_config_for(cfg, bundle, cfg.master_seed());
  const auto ea = data::ea_train_set(bundle);
  const auto pad = data::pad_set(bundle, data::Split::pad_train);
  using train::Strategy;

  TrainArtifacts out;
  out.trainlog = cfg.output_dir / "trainlog.csv";
  log << "training " << train::to_string(t.strategy) << " (seed " << t.seed << ", " << t.epochs << " epochs)\n";
  switch (t.strategy) {
    case Strategy::ea_only: {
      auto r = train::train_ea_only(t, ea);
      out.snapshot = save_model(cfg, r.model, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
    case Strategy::pad_only: {
      auto r = train::train_pad_only(t, pad);
      out.snapshot = save_model(cfg, r.model, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
    case Strategy::mtl: {
      auto r = train::train_mtl(t, ea, pad);
      out.snapshot = save_model(cfg, r.model, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
    case Strategy::mtmt: {
      auto r = train::train_mtmt(t, ea, pad);
      out.snapshot = save_model(cfg, r.model, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
    case Strategy::eyepad: {
      auto r = train::train_eyepad(t, ea, pad);
      out.teacher = save_model(cfg, r.teacher, Strategy::ea_only, t);
      out.snapshot = save_model(cfg, r.student, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
    case Strategy::eyepadpp: {
      auto r = train::train_eyepadpp(t, ea, pad);
      out.snapshot = save_model(cfg, r.model, t.strategy, t);
      r.log.write_csv(out.trainlog);
      break;
    }
  }
  log << "snapshot " << out.snapshot.string() << "\n";
  if (out.teacher) log << "teacher  " << out.teacher->string() << "\n";
  log << "trainlog " << out.trainlog.string() << "\n";
  return out;
}

eval::MetricsReport cmd_evaluate(const ExperimentConfig& cfg, const fs::path& snapshot, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  auto snap = models::load_snapshot(snapshot);
  const auto bundle = require_bundle(cfg);
  if (snap.model.spec().height != bundle.config.height || snap.model.spec().width != bundle.config.width) {
    throw IncompatibleError("snapshot expects " + std::to_string(snap.model.spec().height) + "x" +
                            std::to_string(snap.model.spec().width) + " patches but the bundle holds " +
                            std::to_string(bundle.config.height) + "x" + std::to_string(bundle.config.width));
  }
  const auto seed = cfg.resolved_eval_seed();
  auto report = eval::evaluate_model(snap.model, bundle, cfg.eval, seed, snap.metadata.strategy);

  const auto& dir = cfg.output_dir;
  write_json(dir / "report.json", eval::report_to_json(report));
  io::write_text(dir / "table.csv", eval::report_table_csv(report));
  io::write_text(dir / "roc.csv", eval::report_roc_csv(report));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json record = {{"config_hash", config_hash(cfg)},
                 {"seeds",
                  {{"master", cfg.master_seed()},
                   {"data", bundle.config.seed},
                   {"eval", seed},
                   {"model", snap.metadata.seed}}},
                 {"snapshot", fs::absolute(snapshot).string()},
                 {"bundle", fs::absolute(cfg.resolved_bundle_dir()).string()},
                 {"report", fs::absolute(dir / "report.json").string()},
                 {"trainlog", fs::exists(dir / "trainlog.csv") ? json(fs::absolute(dir / "trainlog.csv").string())
                                                               : json(nullptr)},
                 {"duration_seconds", seconds}};
  write_json(dir / "record.json", record);

  log << "evaluated " << snap.metadata.strategy << " (" << cfg.eval.runs << " runs)\n" << eval::report_table_csv(report);
  return report;
}

std::vector<AblationRow> cmd_ablate_lambda1(const ExperimentConfig& cfg, const std::vector<double>& values,
                                            std::ostream& log) {
  if (values.empty()) throw ConfigError("ablate-lambda1 needs at least one lambda1 value");
  for (double v : values)
    if (!(v >= 0)) throw ConfigError("lambda1 values must be >= 0");
  const auto bundle = require_bundle(cfg);
  const auto ea = data::ea_train_set(bundle);
  const auto pad = data::pad_set(bundle, data::Split::pad_train);
  auto settings = cfg.eval;
  const int K = *std::max_element(settings.ks.begin(), settings.ks.end());
  settings.ks = {K};
  settings.eye_to_eye = false;
  if (std::find(settings.far_targets.begin(), settings.far_targets.end(), 1e-3) == settings.far_targets.end())
    settings.far_targets.push_back(1e-3);

  const auto seeds = cfg.resolved_seeds();
  std::map<double, std::vector<double>> tar, tdr;
  for (auto seed : seeds) {
    const auto base = train_config_for(cfg, bundle, seed);
    log << "teacher (seed " << seed << ")\n";
    auto teacher = train::train_ea_only(base, ea).model;
    for (double l1 : values) {
      auto t = base;
      t.weights.lambda1 = l1;
      auto student = train::train_eyepad_student(t, pad, teacher).model;
      auto report = eval::evaluate_model(student, bundle, settings, cfg.resolved_eval_seed(), "eyepad");
      char name[64];
      std::snprintf(name, sizeof name, "ablation_lambda1_%g_%llu.json", l1, static_cast<unsigned long long>(seed));
      write_json(cfg.output_dir / name, eval::report_to_json(report));
      tar[l1].push_back(report.verification.front().runs.mean.at("tar_1e-3"));
      tdr[l1].push_back(report.pad->tdr_at_fdr);
      log << "  lambda1=" << l1 << " tar@1e-3=" << fixed(tar[l1].back()) << " tdr=" << fixed(tdr[l1].back())
          << "\n";
    }
  }
  std::vector<AblationRow> rows;
  std::ostringstream csv;
  csv << "lambda1,tar_1e-3,tdr_fdr_" << eval::rate_label(cfg.eval.fdr) << "\n";
  for (double l1 : values) {
    AblationRow r{l1, mean_of(tar[l1]), mean_of(tdr[l1])};
    rows.push_back(r);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", l1);
    csv << buf << ',' << fixed(r.tar_1e3) << ',' << fixed(r.tdr) << '\n';
  }
  io::write_text(cfg.output_dir / "ablation.csv", csv.str());
  log << "ablation " << (cfg.output_dir / "ablation.csv").string() << "\n";
  return rows;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::ostream& log) {
  using train::Strategy;
  const auto bundle = require_bundle(cfg);
  const auto ea = data::ea_train_set(bundle);
  const auto pad = data::pad_set(bundle, data::Split::pad_train);
  const auto seeds = cfg.resolved_seeds();
  const int k_max = *std::max_element(cfg.eval.ks.begin(), cfg.eval.ks.end());

  std::map<Strategy, std::vector<eval::MetricsReport>> reports;
  auto finish = [&](Strategy s, const models::EmbeddingModel& model, const train::TrainConfig& t,
                    const train::TrainLog& trainlog) {
    save_model(cfg, model, s, t);
    const std::string tag = std::string(train::to_string(s)) + "_" + std::to_string(t.seed);
    trainlog.write_csv(cfg.output_dir / ("trainlog_" + tag + ".csv"));
    auto settings = cfg.eval;
    if (s == Strategy::pad_only) {
      settings.verification = false;
      settings.eye_to_eye = false;
    }
    if (s == Strategy::ea_only) settings.pad = false;
    auto report = eval::evaluate_model(model, bundle, settings, cfg.resolved_eval_seed(), std::string(train::to_string(s)));
    write_json(cfg.output_dir / ("report_" + tag + ".json"), eval::report_to_json(report));
    log << "  " << tag;
    if (const auto* v = report.for_k(k_max); v && s != Strategy::ea_only)
      log << " ofrr(K=" << k_max << ")=" << fixed(v->runs.mean.at("ofrr"));
    if (report.pad) log << " tdr=" << fixed(report.pad->tdr_at_fdr);
    log << "\n";
    reports[s].push_back(std::move(report));
  };

  for (auto seed : seeds) {
    const auto t = train_config_for(cfg, bundle, seed);
    log << "seed " << seed << "\n";
    auto ea_only = train::train_ea_only(t, ea);
    finish(Strategy::ea_only, ea_only.model, t, ea_only.log);
    auto pad_only = train::train_pad_only(t, pad);
    finish(Strategy::pad_only, pad_only.model, t, pad_only.log);
    auto mtl = train::train_mtl(t, ea, pad);
    finish(Strategy::mtl, mtl.model, t, mtl.log);
    auto mtmt = train::train_mtmt_from(t, ea, pad, ea_only.model, pad_only.model);
    finish(Strategy::mtmt, mtmt.model, t, mtmt.log);
    auto eyepad = train::train_eyepad_student(t, pad, ea_only.model);
    train::TrainLog eyepad_log = ea_only.log;
    eyepad_log.append(eyepad.log);
    finish(Strategy::eyepad, eyepad.model, t, eyepad_log);
    auto eyepadpp = train::train_eyepadpp_from(t, ea, pad, eyepad.model);
    finish(Strategy::eyepadpp, eyepadpp.model, t, eyepadpp.log);
  }

  std::vector<CompareRow> rows;
  for (Strategy s : train::kAllStrategies) {
    const auto& rs = reports.at(s);
    CompareRow row{s, std::nullopt, std::nullopt, {}};
    if (s != Strategy::pad_only) {
      std::vector<eval::RunValues> per_k;
      for (int K : cfg.eval.ks) {
        eval::RunValues mean;
        for (const auto& r : rs)
          for (const auto& [key, value] : r.for_k(K)->runs.mean) mean[key] += value / static_cast<double>(rs.size());
        per_k.push_back(mean);
      }
      row.per_k = per_k;
      for (const auto& r : rs) row.ofrr_by_seed.push_back(r.for_k(k_max)->runs.mean.at("ofrr"));
    }
    if (s != Strategy::ea_only) {
      eval::RunValues p;
      for (const auto& r : rs) {
        const double n = static_cast<double>(rs.size());
        p["tdr"] += r.pad->tdr_at_fdr / n;
        p["apcer"] += r.pad->apcer / n;
        p["bpcer"] += r.pad->bpcer / n;
        p["hter"] += r.pad->hter / n;
      }
      row.pad = p;
    }
    rows.push_back(std::move(row));
  }
  io::write_text(cfg.output_dir / "compare.csv", compare_table_csv(cfg, rows));
  io::write_text(cfg.output_dir / "compare.md", compare_table_markdown(cfg, rows));
  log << compare_table_markdown(cfg, rows);
  return rows;
}

namespace {

struct TableCells {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> ofrr_columns;
};

TableCells compare_cells(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows) {
  TableCells t;
  t.header.push_back("method");
  for (int K : cfg.eval.ks) {
    t.ofrr_columns.push_back(t.header.size());
    t.header.push_back("ofrr_K" + std::to_string(K));
    for (double far : cfg.eval.far_targets) t.header.push_back("tar_" + eval::rate_label(far) + "_K" + std::to_string(K));
  }
  for (const char* c : {"tdr", "apcer", "bpcer", "hter"}) t.header.push_back(c);
  for (const auto& row : rows) {
    std::vector<std::string> cells{std::string(train::to_string(row.strategy))};
    const bool joint = !is_single_task(row.strategy);
    for (std::size_t k = 0; k < cfg.eval.ks.size(); ++k) {
      cells.push_back(joint && row.per_k ? fixed((*row.per_k)[k].at("ofrr")) : "-");
      for (double far : cfg.eval.far_targets)
        cells.push_back(row.per_k ? fixed((*row.per_k)[k].at("tar_" + eval::rate_label(far))) : "-");
    }
    for (const char* c : {"tdr", "apcer", "bpcer", "hter"}) cells.push_back(row.pad ? fixed(row.pad->at(c)) : "-");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace

std::string compare_table_csv(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows) {
  const auto t = compare_cells(cfg, rows);
  std::ostringstream out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
  return out.str();
}

std::string compare_table_markdown(const ExperimentConfig& cfg, const std::vector<CompareRow>& rows) {
  auto t = compare_cells(cfg, rows);
  // Lowest OFRR bold, second lowest underlined.
  for (auto col : t.ofrr_columns) {
    std::set<std::string> values;
    for (const auto& r : t.rows)
      if (r[col] != "-") values.insert(r[col]);
    std::vector<std::string> ranked(values.begin(), values.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return std::stod(a) < std::stod(b); });
    for (auto& r : t.rows) {
      if (!ranked.empty() && r[col] == ranked[0]) {
        r[col] = "**" + r[col] + "**";
      } else if (ranked.size() > 1 && r[col] == ranked[1]) {
        r[col] = "<u>" + r[col] + "</u>";
      }
    }
  }
  std::ostringstream out;
  out << '|';
  for (const auto& h : t.header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? " ---: |" : " --- |");
  out << '\n';
  for (const auto& r : t.rows) {
    out << '|';
    for (const auto& c : r) out << ' ' << c << " |";
    out << '\n';
  }
  return out.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const MissingInputError*>(&e)) return 3;
  if (dynamic_cast<const IncompatibleError*>(&e)) return 4;
  return 1;
}

}  // namespace eyepad::cli

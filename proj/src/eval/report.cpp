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

#include "eyepad/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "eyepad/error.hpp"
#include "eyepad/io.hpp"

namespace eyepad::eval {
namespace {

using nlohmann::json;

std::string fixed(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string precise(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json run_json(const RunValues& v, const std::vector<double>& far_targets, bool integral_counts) {
  json tar = json::object();
  for (double far : far_targets) tar[rate_label(far)] = v.at("tar_" + rate_label(far));
  json out = {{"tar_at_far", tar}, {"t_auth", json_number(v.at("t_auth"))}, {"ofrr", v.at("ofrr")}};
  if (integral_counts) {
    out["x_spoof"] = static_cast<int>(v.at("x_spoof"));
    out["x_auth"] = static_cast<int>(v.at("x_auth"));
  } else {
    out["x_spoof"] = v.at("x_spoof");
    out["x_auth"] = v.at("x_auth");
  }
  return out;
}

void roc_rows(std::ostringstream& out, const std::string& curve, const std::string& k, const RocCurve& roc) {
  for (const auto& p : roc.points)
    out << curve << ',' << k << ',' << precise(p.threshold) << ',' << precise(p.tpr) << ',' << precise(p.fpr) << '\n';
}

}  // namespace

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void EvalSettings::validate() const {
  if (verification && ks.empty()) throw ConfigError("eval.ks must not be empty");
  for (int k : ks)
    if (k < 1) throw ConfigError("eval.ks entries must be >= 1");
  if (far_targets.empty()) throw ConfigError("eval.far_targets must not be empty");
  for (double f : far_targets)
    if (!(f > 0 && f < 1)) throw ConfigError("eval.far_targets entries must lie in (0,1)");
  if (runs < 1) throw ConfigError("eval.runs must be >= 1");
  if (!(fdr > 0 && fdr < 1)) throw ConfigError("eval.fdr must lie in (0,1)");
  if (!(sar > 0 && sar < 1)) throw ConfigError("eval.sar must lie in (0,1)");
}

const VerificationReport* MetricsReport::for_k(int K) const {
  for (const auto& v : verification)
    if (v.K == K) return &v;
  return nullptr;
}

MetricsReport evaluate_model(const models::EmbeddingModel& model, const data::DatasetBundle& bundle,
                             const EvalSettings& settings, std::uint64_t seed, const std::string& strategy) {
  settings.validate();
  if (model.spec().input_size() != bundle.patch_size()) {
    throw IncompatibleError("model expects " + std::to_string(model.spec().height) + "x" +
                            std::to_string(model.spec().width) + " patches, bundle holds " +
                            std::to_string(bundle.config.height) + "x" + std::to_string(bundle.config.width));
  }
  MetricsReport report;
  report.strategy = strategy;
  report.eval_seed = seed;
  report.settings = settings;

  double t_pad = std::numeric_limits<double>::infinity();
  if (settings.pad) {
    const auto set = data::pad_set(bundle, data::Split::pad_test);
    report.pad = pad_metrics(pad_scores(model, set), settings.fdr, settings.sar);
    t_pad = report.pad->t_pad;
  }
  const auto query_images = data::images_by_user(bundle, data::Split::ea_query);
  if (settings.verification) {
    const auto query = encode_users(model, query_images);
    const auto gallery = encode_users(model, data::images_by_user(bundle, data::Split::ea_gallery));
    for (int K : settings.ks) {
      const auto k_seed = io::derive_seed(seed, "verification", static_cast<std::uint64_t>(K));
      VerificationReport v;
      v.K = K;
      v.runs = verification_runs(query, gallery, K, t_pad, settings.runs, k_seed, settings.far_targets);
      v.first_run_roc =
          user_to_user(query, gallery, K, io::derive_seed(k_seed, "protocol", 0), settings.far_targets).roc;
      report.verification.push_back(std::move(v));
    }
  }
  if (settings.eye_to_eye) report.eye_to_eye = eye_to_eye_eval(model, query_images);
  return report;
}

json report_to_json(const MetricsReport& r) {
  const auto& s = r.settings;
  json j;
  j["format"] = "eyepad-report";
  j["version"] = 1;
  j["strategy"] = r.strategy;
  j["eval_seed"] = r.eval_seed;
  j["run_count"] = s.runs;
  j["settings"] = {{"ks", s.ks}, {"far_targets", s.far_targets}, {"runs", s.runs}, {"fdr", s.fdr}, {"sar", s.sar}};
  json verification = json::array();
  for (const auto& v : r.verification) {
    json entry = run_json(v.runs.mean, s.far_targets, false);
    entry["K"] = v.K;
    json per_run = json::array();
    for (const auto& run : v.runs.runs) per_run.push_back(run_json(run, s.far_targets, true));
    entry["per_run"] = per_run;
    verification.push_back(entry);
  }
  j["verification"] = verification;
  if (r.pad) {
    j["pad"] = {{"tdr_at_fdr", r.pad->tdr_at_fdr}, {"fdr", s.fdr},           {"apcer", r.pad->apcer},
                {"bpcer", r.pad->bpcer},           {"hter", r.pad->hter},    {"t_pad", json_number(r.pad->t_pad)},
                {"sar", s.sar}};
  } else {
    j["pad"] = nullptr;
  }
  if (r.eye_to_eye) {
    j["eye_to_eye"] = {{"tar_at_far_1e-3", r.eye_to_eye->tar_at_1e3}, {"eer", r.eye_to_eye->eer}};
  } else {
    j["eye_to_eye"] = nullptr;
  }
  return j;
}

std::vector<std::string> validate_report_json(const json& j) {
  std::vector<std::string> problems;
  auto need = [&](const json& obj, const std::string& where, const char* key) -> const json* {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return nullptr;
    }
    return &obj.at(key);
  };
  auto rate = [&](const json& obj, const std::string& where, const char* key) {
    if (const json* v = need(obj, where, key)) {
      if (!v->is_number() || v->get<double>() < 0 || v->get<double>() > 1)
        problems.push_back(where + "." + key + ": expected a rate in [0,1]");
    }
  };
  auto count = [&](const json& obj, const std::string& where, const char* key) {
    if (const json* v = need(obj, where, key)) {
      if (!v->is_number() || v->get<double>() < 0) problems.push_back(where + "." + key + ": expected a count >= 0");
    }
  };
  auto number_or_null = [&](const json& obj, const std::string& where, const char* key) {
    if (const json* v = need(obj, where, key)) {
      if (!v->is_number() && !v->is_null()) problems.push_back(where + "." + key + ": expected a number or null");
    }
  };
  auto run_fields = [&](const json& obj, const std::string& where) {
    if (const json* tar = need(obj, where, "tar_at_far")) {
      if (!tar->is_object() || tar->empty()) {
        problems.push_back(where + ".tar_at_far: expected a non-empty object");
      } else {
        for (const auto& [k, v] : tar->items())
          if (!v.is_number() || v.get<double>() < 0 || v.get<double>() > 1)
            problems.push_back(where + ".tar_at_far." + k + ": expected a rate in [0,1]");
      }
    }
    rate(obj, where, "ofrr");
    count(obj, where, "x_spoof");
    count(obj, where, "x_auth");
    number_or_null(obj, where, "t_auth");
  };

  if (!j.is_object()) return {"report: expected a JSON object"};
  if (j.value("format", "") != "eyepad-report") problems.push_back("report.format: expected 'eyepad-report'");
  if (!j.contains("version") || j["version"] != 1) problems.push_back("report.version: expected 1");
  int runs = 0;
  if (const json* rc = need(j, "report", "run_count")) {
    if (!rc->is_number_integer() || rc->get<int>() < 1) {
      problems.push_back("report.run_count: expected an integer >= 1");
    } else {
      runs = rc->get<int>();
    }
  }
  if (const json* ver = need(j, "report", "verification")) {
    if (!ver->is_array()) {
      problems.push_back("report.verification: expected an array");
    } else {
      for (std::size_t i = 0; i < ver->size(); ++i) {
        const auto& v = (*ver)[i];
        const std::string where = "report.verification[" + std::to_string(i) + "]";
        if (const json* k = need(v, where, "K"); k && (!k->is_number_integer() || k->get<int>() < 1))
          problems.push_back(where + ".K: expected an integer >= 1");
        run_fields(v, where);
        if (const json* pr = need(v, where, "per_run")) {
          if (!pr->is_array() || static_cast<int>(pr->size()) != runs) {
            problems.push_back(where + ".per_run: expected run_count entries");
          } else {
            for (std::size_t r = 0; r < pr->size(); ++r)
              run_fields((*pr)[r], where + ".per_run[" + std::to_string(r) + "]");
          }
        }
      }
    }
  }
  if (const json* pad = need(j, "report", "pad"); pad && !pad->is_null()) {
    for (const char* key : {"tdr_at_fdr", "fdr", "apcer", "bpcer", "hter"}) rate(*pad, "report.pad", key);
    number_or_null(*pad, "report.pad", "t_pad");
    if (problems.empty() && std::abs((*pad)["hter"].get<double>() -
                                     ((*pad)["apcer"].get<double>() + (*pad)["bpcer"].get<double>()) / 2) > 1e-15)
      problems.push_back("report.pad.hter: not the mean of apcer and bpcer");
  }
  if (const json* e2e = need(j, "report", "eye_to_eye"); e2e && !e2e->is_null()) {
    rate(*e2e, "report.eye_to_eye", "tar_at_far_1e-3");
    rate(*e2e, "report.eye_to_eye", "eer");
  }
  return problems;
}

std::string report_table_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "K,ofrr";
  for (double far : r.settings.far_targets) out << ",tar_" << rate_label(far);
  out << ",tdr_fdr_" << rate_label(r.settings.fdr) << ",apcer,bpcer,hter\n";
  for (const auto& v : r.verification) {
    out << v.K << ',' << fixed(v.runs.mean.at("ofrr"));
    for (double far : r.settings.far_targets) out << ',' << fixed(v.runs.mean.at("tar_" + rate_label(far)));
    if (r.pad) {
      out << ',' << fixed(r.pad->tdr_at_fdr) << ',' << fixed(r.pad->apcer) << ',' << fixed(r.pad->bpcer) << ','
          << fixed(r.pad->hter);
    } else {
      out << ",-,-,-,-";
    }
    out << '\n';
  }
  return out.str();
}

std::string report_roc_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "curve,K,threshold,tpr,fpr\n";
  for (const auto& v : r.verification) roc_rows(out, "user_to_user", std::to_string(v.K), v.first_run_roc);
  if (r.pad) roc_rows(out, "pad", "-", r.pad->roc);
  if (r.eye_to_eye) roc_rows(out, "eye_to_eye", "-", r.eye_to_eye->roc);
  return out.str();
}

}  // namespace eyepad::eval

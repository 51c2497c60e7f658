#include "otclt/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace otclt {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  stack_.push_back('o');
  container_empty_ = true;
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  stack_.pop_back();
  container_empty_ = false;
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ += '[';
  stack_.push_back('a');
  container_empty_ = true;
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  stack_.pop_back();
  container_empty_ = false;
  return *this;
}

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!stack_.empty() && !container_empty_) out_ += ',';
  container_empty_ = false;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  separator();
  out_ += '"';
  out_ += name;
  out_ += "\":";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separator();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"':
        out_ += "\\\"";
        break;
      case '\\':
        out_ += "\\\\";
        break;
      case '\n':
        out_ += "\\n";
        break;
      case '\t':
        out_ += "\\t";
        break;
      default:
        out_ += c;
    }
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::null_value() {
  separator();
  out_ += "null";
  return *this;
}

std::string JsonWriter::take() {
  if (!stack_.empty()) throw std::logic_error("JsonWriter: unbalanced containers");
  return std::move(out_);
}

void write_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::invalid_argument("write failure on '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw std::invalid_argument("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::string to_json(const CltReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("statistic").value(report.statistic);
  w.key("sigma_sq_hat").value(report.sigma_sq_hat);
  w.key("stderr").value(report.stderr_value);
  w.key("ci_lo").value(report.ci_lo);
  w.key("ci_hi").value(report.ci_hi);
  w.key("alpha").value(report.alpha);
  w.key("n").value(report.n);
  w.key("m").value(report.m);
  w.key("lambda").value(report.lambda);
  w.key("es_bound");
  if (report.es_bound.has_value()) {
    w.value(*report.es_bound);
  } else {
    w.null_value();
  }
  w.key("center_note").value(report.center_note);
  w.key("degenerate_variance").value(report.degenerate_variance);
  w.end_object();
  return w.take();
}

std::string to_json(const TransportPlan& plan, const DualPair& duals) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("objective").value(plan.objective);
  w.key("n").value(plan.n);
  w.key("m").value(plan.m);
  w.key("entries").begin_array();
  for (const auto& e : plan.entries) {
    w.begin_array().value(e.i).value(e.j).value(e.mass).end_array();
  }
  w.end_array();
  w.key("dual_u").begin_array();
  for (double u : duals.u) w.value(u);
  w.end_array();
  w.key("dual_v").begin_array();
  for (double v : duals.v) w.value(v);
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const PotentialVector& potential) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("side").value(potential.side == PotentialVector::Side::P ? "P" : "Q");
  w.key("anchored_at");
  if (potential.anchored_at.has_value()) {
    w.value(*potential.anchored_at);
  } else {
    w.null_value();
  }
  w.key("values").begin_array();
  for (double v : potential.values) w.value(v);
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const CltSimResult& result) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("n").value(result.n);
  w.key("m").value(result.m);
  w.key("reps").value(result.reps);
  w.key("seed").value(result.seed);
  w.key("rate").value(result.rate);
  w.key("theory_sigma_sq").value(result.theory_sigma_sq);
  w.key("mean_statistic").value(result.mean_statistic);
  w.key("empirical_variance_scaled").value(result.empirical_variance_scaled);
  w.key("ks_distance").value(result.ks_distance);
  w.key("statistics").begin_array();
  for (double s : result.statistics) w.value(s);
  w.end_array();
  w.key("standardized").begin_array();
  for (double z : result.standardized) w.value(z);
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const DecayTable& table) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("reps").value(table.reps);
  w.key("seed").value(table.seed);
  w.key("rows").begin_array();
  for (const auto& row : table.rows) {
    w.begin_object();
    w.key("n").value(row.n);
    w.key("m").value(row.m);
    w.key("var_rn").value(row.var_rn);
    w.key("n_var_rn").value(row.n_var_rn);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const StabilityCurve& curve) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("reps").value(curve.reps);
  w.key("seed").value(curve.seed);
  w.key("anchor_index").value(curve.anchor_index);
  w.key("rows").begin_array();
  for (const auto& row : curve.rows) {
    w.begin_object();
    w.key("n").value(row.n);
    w.key("m").value(row.m);
    w.key("sup_error").value(row.sup_error);
    w.key("l2_error").value(row.l2_error);
    w.key("centered_sup_error").value(row.centered_sup_error);
    w.key("map_sup_error").value(row.map_sup_error);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const MapStabilityCurve& curve) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("reps").value(curve.reps);
  w.key("seed").value(curve.seed);
  w.key("rows").begin_array();
  for (const auto& row : curve.rows) {
    w.begin_object();
    w.key("n").value(row.n);
    w.key("m").value(row.m);
    w.key("sup_error").value(row.sup_error);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string to_json(const OptimalityCertificate& cert) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("max_marginal_violation").value(cert.max_marginal_violation);
  w.key("max_dual_infeasibility").value(cert.max_dual_infeasibility);
  w.key("max_slackness_violation").value(cert.max_slackness_violation);
  w.key("duality_gap").value(cert.duality_gap);
  w.key("pass").value(cert.pass);
  w.end_object();
  return w.take();
}

std::string to_json(const MonotonicityReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("worst_margin").value(report.worst_margin);
  w.key("worst_k").value(report.worst_k);
  w.key("checked_subsets").value(static_cast<std::int64_t>(report.checked_subsets));
  w.key("pass").value(report.pass);
  w.end_object();
  return w.take();
}

std::string to_csv(const CltSimResult& result) {
  std::string out = "rep,statistic,standardized\n";
  char buf[96];
  for (std::size_t r = 0; r < result.statistics.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", r, result.statistics[r],
                  result.standardized[r]);
    out += buf;
  }
  return out;
}

std::string to_csv(const DecayTable& table) {
  std::string out = "n,m,var_rn,n_var_rn\n";
  char buf[128];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", row.n, row.m, row.var_rn,
                  row.n_var_rn);
    out += buf;
  }
  return out;
}

std::string to_csv(const StabilityCurve& curve) {
  std::string out = "n,m,sup_error,l2_error,centered_sup_error,map_sup_error\n";
  char buf[192];
  for (const auto& row : curve.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", row.n, row.m,
                  row.sup_error, row.l2_error, row.centered_sup_error, row.map_sup_error);
    out += buf;
  }
  return out;
}

PotentialVector potential_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open potential file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("potential file '" + path + "' is not valid JSON: " + e.what());
  }
  PotentialVector p;
  if (!j.contains("side") || !j.contains("values")) {
    throw std::invalid_argument("potential file '" + path + "' needs 'side' and 'values'");
  }
  const std::string side = j["side"].get<std::string>();
  if (side == "P") {
    p.side = PotentialVector::Side::P;
  } else if (side == "Q") {
    p.side = PotentialVector::Side::Q;
  } else {
    throw std::invalid_argument("potential side must be 'P' or 'Q'");
  }
  p.values = j["values"].get<std::vector<double>>();
  if (j.contains("anchored_at") && !j["anchored_at"].is_null()) {
    p.anchored_at = j["anchored_at"].get<int>();
  }
  return p;
}

}  // namespace otclt

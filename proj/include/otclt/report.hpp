#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "otclt/duality.hpp"
#include "otclt/inference.hpp"
#include "otclt/montecarlo.hpp"
#include "otclt/solver.hpp"

namespace otclt {

/// Minimal streaming JSON writer with insertion-ordered keys and numbers
/// formatted to 17 significant digits, so identical inputs serialize to
/// identical bytes and doubles round-trip losslessly. Non-finite values
/// are emitted as the strings "inf", "-inf" or "nan" (JSON has no number
/// form for them).
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null_value();

  std::string take();

 private:
  void separator();
  std::string out_;
  std::vector<char> stack_;  // 'o' or 'a'
  bool pending_key_ = false;
  bool container_empty_ = true;
};

std::string format_double(double v);

/// Writes content to path via a temporary file plus rename, so readers
/// never observe a partial report.
void write_atomic(const std::string& path, std::string_view content);

// Fixed-schema serializers (schema_version 1, fixed key order, no extra
// keys). Numbers use 17 significant digits throughout.
std::string to_json(const CltReport& report);
std::string to_json(const TransportPlan& plan, const DualPair& duals);
std::string to_json(const PotentialVector& potential);
std::string to_json(const CltSimResult& result);
std::string to_json(const DecayTable& table);
std::string to_json(const StabilityCurve& curve);
std::string to_json(const MapStabilityCurve& curve);
std::string to_json(const OptimalityCertificate& cert);
std::string to_json(const MonotonicityReport& report);

/// One row per replication: rep,statistic,standardized.
std::string to_csv(const CltSimResult& result);
/// One row per schedule entry: n,m,var_rn,n_var_rn.
std::string to_csv(const DecayTable& table);
/// One row per schedule entry: n,m,sup_error,l2_error,centered_sup_error,map_sup_error.
std::string to_csv(const StabilityCurve& curve);

/// Parses {"side": "P"|"Q", "values": [...]} (the `transform` input).
PotentialVector potential_from_json_file(const std::string& path);

}  // namespace otclt

#include "hdrtv/report.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"

namespace hdrtv {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json vector_json(const metrics::MetricVector& m) {
  json out = json::object();
  const auto slots = m.slots();
  for (std::size_t i = 0; i < slots.size(); ++i)
    out[std::string(metrics::MetricVector::kNames[i])] = optional_number(slots[i]);
  return out;
}

metrics::MetricVector average_of(std::span<const MetricRow> rows) {
  std::vector<metrics::MetricVector> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.values);
  return metrics::frame_average(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void append_row(std::string& out, const std::string& path, const metrics::MetricVector& m) {
  out += csv_field(path);
  for (const auto& s : m.slots()) {
    out += ',';
    if (s) out += format_number(*s);
  }
  out += '\n';
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string metrics_csv(std::span<const MetricRow> rows) {
  std::string out = "path";
  for (auto n : metrics::MetricVector::kNames) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (const auto& r : rows) append_row(out, r.path, r.values);
  append_row(out, "frame-average", average_of(rows));
  return out;
}

std::string metrics_json(std::span<const MetricRow> rows, std::string_view mode) {
  json frames = json::array();
  for (const auto& r : rows) frames.push_back({{"path", r.path}, {"metrics", vector_json(r.values)}});
  json doc{{"mode", std::string(mode)},
           {"frames", std::move(frames)},
           {"frame_average", vector_json(average_of(rows))}};
  return doc.dump(2) + "\n";
}

std::string comparison_json(const metrics::ComparisonReport& r) {
  json doc{{"recovery",
            {{"fhlp", optional_number(r.fhlp_recovery)},
             {"ehl", optional_number(r.ehl_recovery)},
             {"fwgp", optional_number(r.fwgp_recovery)},
             {"ewg", optional_number(r.ewg_recovery)}}},
           {"shift", {{"asl", optional_number(r.asl_shift)}, {"all", optional_number(r.all_shift)}}},
           {"psnr_db", std::isinf(r.psnr_db) ? json("inf") : json(r.psnr_db)},
           {"delta_e_itp", r.delta_e_itp},
           {"pred", vector_json(r.pred)},
           {"gt", vector_json(r.gt)}};
  return doc.dump(2) + "\n";
}

}  // namespace hdrtv

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "fdd/error.hpp"
#include "fdd/harness.hpp"

namespace fdd {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (in_quotes) throw ConfigError("csv: unterminated quoted field");
  return fields;
}

template <class T>
T parse_number(const std::string& s, std::size_t lineno) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(s, &used);
    } else {
      v = static_cast<T>(std::stoull(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << quote(r.method) << ',' << r.iteration << ',' << r.num_features << ','
        << fmt_double(r.td_error_l2) << ',' << fmt_double(r.wall_ms) << ',' << r.candidates_scored << ','
        << (r.feature_added ? quote(r.feature_added->to_string()) : std::string{}) << '\n';
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordCsvHeader) throw ConfigError("csv: unexpected header '" + line + "'");
  std::vector<ExperimentRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw ConfigError("csv line " + std::to_string(lineno) + ": expected 8 fields");
    ExperimentRecord r;
    r.run_id = parse_number<std::size_t>(f[0], lineno);
    r.method = f[1];
    r.iteration = parse_number<std::size_t>(f[2], lineno);
    r.num_features = parse_number<std::size_t>(f[3], lineno);
    r.td_error_l2 = parse_number<double>(f[4], lineno);
    r.wall_ms = parse_number<double>(f[5], lineno);
    r.candidates_scored = parse_number<std::size_t>(f[6], lineno);
    if (!f[7].empty()) r.feature_added = Feature::parse(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> aggregate(const std::vector<ExperimentRecord>& records, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("aggregate: confidence must lie in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);

  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::vector<const ExperimentRecord*>>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.method)) order.push_back(r.method);
    groups[r.method][r.iteration].push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& method : order) {
    for (const auto& [iteration, rows] : groups[method]) {
      SummaryRow s;
      s.method = method;
      s.iteration = iteration;
      s.runs = rows.size();
      const auto n = static_cast<double>(rows.size());
      for (const auto* r : rows) {
        s.mean_td_error += r->td_error_l2;
        s.mean_wall_ms += r->wall_ms;
        s.mean_features += static_cast<double>(r->num_features);
      }
      s.mean_td_error /= n;
      s.mean_wall_ms /= n;
      s.mean_features /= n;
      if (rows.size() >= 2) {
        double ss = 0.0;
        for (const auto* r : rows) ss += (r->td_error_l2 - s.mean_td_error) * (r->td_error_l2 - s.mean_td_error);
        s.ci_half_width = z * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
      out.push_back(s);
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,iteration,runs,mean_features,mean_td_error_l2,ci_half_width,mean_wall_ms\n";
  for (const auto& s : rows) {
    out << quote(s.method) << ',' << s.iteration << ',' << s.runs << ',' << fmt_double(s.mean_features) << ','
        << fmt_double(s.mean_td_error) << ',' << (s.ci_half_width ? fmt_double(*s.ci_half_width) : std::string{})
        << ',' << fmt_double(s.mean_wall_ms) << '\n';
  }
}

}  // namespace fdd

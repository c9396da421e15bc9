#include "mbcs/records.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mbcs {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw ConfigError("malformed number in CSV: " + s);
  return v;
}

}  // namespace

void emit_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.run_id << ',' << r.dimension << ',' << r.n_bands << ',' << format_double(r.lambda) << ','
       << format_double(r.kappa) << ',' << (r.tc_found ? format_double(r.tc) : std::string()) << ','
       << (r.tc_found ? "true" : "false") << ',' << format_double(r.min_eig_at_tc) << ',' << r.channel << ','
       << r.grid_points << ',' << r.iterations << ',' << (r.log_ratio ? format_double(*r.log_ratio) : std::string())
       << '\n';
  }
}

std::string emit_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  emit_csv(os, records);
  return os.str();
}

std::vector<SweepRecord> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("unexpected CSV header: " + line);
  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 12) throw ConfigError("CSV row with " + std::to_string(f.size()) + " fields");
    SweepRecord r;
    r.run_id = f[0];
    r.dimension = std::stoi(f[1]);
    r.n_bands = static_cast<std::size_t>(std::stoul(f[2]));
    r.lambda = parse_double(f[3]);
    r.kappa = parse_double(f[4]);
    if (f[6] != "true" && f[6] != "false") throw ConfigError("tc_found must be true or false");
    r.tc_found = f[6] == "true";
    if (r.tc_found) r.tc = parse_double(f[5]);
    r.min_eig_at_tc = parse_double(f[7]);
    r.channel = std::stoi(f[8]);
    r.grid_points = static_cast<std::size_t>(std::stoul(f[9]));
    r.iterations = std::stoi(f[10]);
    if (!f[11].empty()) r.log_ratio = parse_double(f[11]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SweepRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  return parse_csv(is);
}

void sort_records(std::vector<SweepRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.kappa != b.kappa) return a.kappa < b.kappa;
    return a.run_id < b.run_id;
  });
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::vector<GoldenEntry> read_golden(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open golden file " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("model_id,quantity,value,oracle_err", 0) != 0) throw ConfigError("unexpected golden header");
  std::vector<GoldenEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw ConfigError("golden row needs 4 fields");
    out.push_back({f[0], f[1], parse_double(f[2]), parse_double(f[3])});
  }
  return out;
}

}  // namespace mbcs

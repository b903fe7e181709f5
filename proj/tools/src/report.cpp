#include "tactile_cli/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#ifndef TACTILE_VERSION
#define TACTILE_VERSION "0.0.0"
#endif

namespace tactile::cli {

namespace {

std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string tool_version() { return TACTILE_VERSION; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  tables.push_back({name, std::move(columns), {}});
  return tables.back();
}

std::string Report::config_hash() const { return fnv1a_hex(config.dump()); }

std::string Report::render(Format format) const {
  const std::string schema = "tactile-bench/" + command + "/v" + std::to_string(kReportSchemaVersion);
  if (format == Format::kJson) {
    Json j;
    j["schema"] = schema;
    j["version"] = tool_version();
    j["seed"] = seed;
    j["config_hash"] = config_hash();
    j["config"] = config;
    j["summary"] = summary;
    Json tabs = Json::object();
    for (const auto& t : tables) {
      Json rows = Json::array();
      for (const auto& r : t.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < t.columns.size() && i < r.size(); ++i) obj[t.columns[i]] = r[i];
        rows.push_back(std::move(obj));
      }
      tabs[t.name] = std::move(rows);
    }
    j["tables"] = std::move(tabs);
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "# schema=" << schema << "\n";
  os << "# version=" << tool_version() << "\n";
  os << "# seed=" << seed << "\n";
  os << "# config_hash=" << config_hash() << "\n";
  os << "# config=" << config.dump() << "\n";
  for (auto it = summary.begin(); it != summary.end(); ++it) os << "# " << it.key() << "=" << cell_text(*it) << "\n";
  for (const auto& t : tables) {
    os << "# table=" << t.name << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
    os << "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(r[i]));
      os << "\n";
    }
  }
  return os.str();
}

std::string pretty_table(const Table& table) {
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t i = 0; i < width.size(); ++i) width[i] = table.columns[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : table.rows) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      line.push_back(cell_text(r[i]));
      width[i] = std::max(width[i], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      os << (i ? "  " : "") << line[i] << std::string(width[i] - line[i].size(), ' ');
    }
    os << "\n";
  };
  os << "[" << table.name << "]\n";
  emit(table.columns);
  for (const auto& line : cells) emit(line);
  return os.str();
}

}  // namespace tactile::cli

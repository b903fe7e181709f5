#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "json.hpp"

namespace tactile::cli {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

enum class Format { kCsv, kJson };

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) { rows.push_back(std::move(row)); }
};

// Machine-readable result of one subcommand. Every report names its schema
// and carries the seed, a hash of the effective configuration and the tool
// version, so two reports can be compared field by field.
struct Report {
  std::string command;
  std::uint64_t seed = 0;
  Json config = Json::object();
  Json summary = Json::object();
  std::deque<Table> tables;  // stable references from table()

  Table& table(const std::string& name, std::vector<std::string> columns);
  std::string config_hash() const;
  std::string render(Format format) const;
};

std::string tool_version();
// FNV-1a 64 of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// Fixed-width text table for the terminal.
std::string pretty_table(const Table& table);

}  // namespace tactile::cli

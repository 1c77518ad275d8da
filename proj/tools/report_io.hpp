#pragma once

// Serialization helpers for the CLI: CSV/JSON emission with 17-significant-
// digit numbers so round-trips are lossless and outputs byte-stable.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "levychan/identities.hpp"

namespace levychan_cli {

using ordered_json = nlohmann::ordered_json;

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
      throw std::logic_error("csv row width mismatch");
    }
    rows_.push_back(std::move(cells));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      out += header_[i];
      out += i + 1 < header_.size() ? ',' : '\n';
    }
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out += row[i];
        out += i + 1 < row.size() ? ',' : '\n';
      }
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// All writes happen after computation: callers accumulate content, then flush.
inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << content;
}

inline ordered_json report_to_json(const levychan::IdentityReport& rep) {
  ordered_json j;
  j["identity"] = levychan::to_string(rep.id);
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["abs_gap"] = rep.abs_gap;
  j["error_budget"] = rep.error_budget;
  j["slack"] = rep.slack;
  j["passed"] = rep.passed;
  j["converged"] = rep.converged;
  ordered_json cfg;
  cfg["channel"] = rep.config.channel;
  cfg["atoms"] = rep.config.atoms;
  cfg["weights_p"] = rep.config.weights_p;
  cfg["weights_q"] = rep.config.weights_q;
  cfg["gamma"] = rep.config.gamma;
  cfg["tol"] = rep.config.tol;
  cfg["slack_mult"] = rep.config.slack_mult;
  cfg["mutation_sigma_scale"] = rep.config.mutation.sigma_scale;
  cfg["mutation_nu_scale"] = rep.config.mutation.nu_scale;
  if (!rep.config.extra.empty()) cfg["extra"] = rep.config.extra;
  j["config"] = cfg;
  if (!rep.annotation.empty()) j["annotation"] = rep.annotation;
  return j;
}

}  // namespace levychan_cli

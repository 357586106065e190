#include "ensk/csv.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ensk/errors.hpp"

namespace ensk {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace.
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  return cells;
}

double parse_double(const std::string& text, std::size_t row, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument,
                "row " + std::to_string(row) + ": cannot parse " + what + " '" + text + "'");
  }
}

}  // namespace

Pool read_pool_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyPool, "empty pool file");
  auto header = split_row(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "accuracy" ||
      (header.size() >= 3 && header[2] != "cost") || header.size() > 3) {
    throw Error(Errc::InvalidArgument, "header must be 'id,accuracy[,cost]'");
  }
  const bool has_cost = header.size() == 3;

  std::vector<Member> members;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::InvalidArgument,
                  "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " columns, got " + std::to_string(cells.size()));
    }
    Member m;
    m.id = cells[0];
    m.accuracy = parse_double(cells[1], row, "accuracy");
    m.cost = has_cost ? parse_double(cells[2], row, "cost") : 1.0;
    members.push_back(std::move(m));
  }
  return validate_pool(members);
}

Pool read_pool_csv_file(const std::string& path) {
  if (path == "-") return read_pool_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open pool file '" + path + "'");
  return read_pool_csv(in);
}

std::vector<double> read_weights_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open weights file '" + path + "'");
  std::vector<double> weights;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    for (const auto& cell : split_row(line)) {
      if (cell.empty()) continue;
      weights.push_back(parse_double(cell, row, "weight"));
    }
  }
  if (weights.empty()) throw Error(Errc::EmptyInput, "weights file has no values");
  return weights;
}

void write_replicates_csv(std::ostream& out, const ExperimentReport& report) {
  out.precision(12);
  out << "replicate,strategy,mode,energy,steps,terminated_by\n";
  for (const auto& rec : report.records) {
    out << rec.replicate << ',' << rec.strategy << ',' << rec.mode << ',' << rec.energy << ','
        << rec.steps << ',' << rec.terminated_by << '\n';
  }
}

void write_traces_csv(std::ostream& out, const ExperimentReport& report) {
  out.precision(12);
  out << "replicate,strategy,mode,step,best_energy\n";
  for (const auto& rec : report.records) {
    for (const auto& [step, energy] : rec.trace) {
      out << rec.replicate << ',' << rec.strategy << ',' << rec.mode << ',' << step << ','
          << energy << '\n';
    }
  }
}

}  // namespace ensk

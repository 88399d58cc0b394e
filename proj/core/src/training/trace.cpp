#include "madrom/training/trace.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace madrom::train {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

RunTrace RunTrace::filter(const std::string& phase) const {
  if (phase.empty()) return *this;
  RunTrace out;
  for (const auto& r : rows) {
    if (r.phase == phase) out.rows.push_back(r);
  }
  return out;
}

std::optional<double> RunTrace::final_relative_l2() const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->relative_l2) return it->relative_l2;
  }
  return std::nullopt;
}

void RunTrace::write_csv(std::ostream& os) const {
  os << "iteration,loss,relative_l2,lr,elapsed_ms,phase\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << fmt(r.loss) << ',' << (r.relative_l2 ? fmt(*r.relative_l2) : "") << ','
       << fmt(r.lr) << ',' << fmt(r.elapsed_ms) << ',' << r.phase << '\n';
  }
}

RunTrace RunTrace::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "iteration,loss,relative_l2,lr,elapsed_ms,phase") {
    throw std::runtime_error("trace csv: unexpected header");
  }
  RunTrace out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw std::runtime_error("trace csv: expected 6 columns: " + line);
    TraceRow r;
    r.iteration = std::stoll(cells[0]);
    r.loss = std::stod(cells[1]);
    if (!cells[2].empty()) r.relative_l2 = std::stod(cells[2]);
    r.lr = std::stod(cells[3]);
    r.elapsed_ms = std::stod(cells[4]);
    r.phase = cells[5];
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace madrom::train

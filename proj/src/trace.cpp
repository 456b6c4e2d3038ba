#include "fima/trace.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fima/common.hpp"

namespace fima {
namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw InputError("trace: bad number '" + s + "'");
  return v;
}

Policy parse_policy(std::string_view s) {
  if (s == "accept") return Policy::Accept;
  if (s == "fallback") return Policy::Fallback;
  throw InputError("trace: bad policy '" + std::string(s) + "'");
}

// JSON has no infinities; the objective of an infeasible point is written
// as the string "inf".
nlohmann::json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}

double json_number(const nlohmann::json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

bool same_double(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

}  // namespace

std::string_view to_string(Policy p) { return p == Policy::Accept ? "accept" : "fallback"; }

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Budget: return "budget";
  }
  return "none";
}

double iteration_error(double change_norm, double prev_norm) {
  return prev_norm > 0.0 ? change_norm / prev_norm : change_norm;
}

StopReason stopping(const IterateTrace& trace, int max_iters, double tol) {
  if (trace.empty()) throw InvalidArgument("stopping: no completed iteration");
  const IterateRecord& last = trace.back();
  if (last.iter_error <= tol) return StopReason::Tolerance;
  if (last.k >= max_iters) return StopReason::Budget;
  return StopReason::None;
}

void write_trace_csv(const IterateTrace& trace, std::ostream& out) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << fmt17(r.objective) << ',' << fmt17(r.iter_error) << ','
        << fmt17(r.recon_error) << ',' << to_string(r.policy) << ',';
    if (r.block) out << *r.block;
    out << ',' << fmt17(r.wall_ms) << '\n';
  }
}

IterateTrace parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw InputError("trace csv: missing or unexpected header");
  IterateTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw InputError("trace csv: expected 7 fields in '" + line + "'");
    IterateRecord r;
    r.k = std::stoi(cells[0]);
    r.objective = parse_double(cells[1]);
    r.iter_error = parse_double(cells[2]);
    r.recon_error = parse_double(cells[3]);
    r.policy = parse_policy(cells[4]);
    if (!cells[5].empty()) r.block = std::stoi(cells[5]);
    r.wall_ms = parse_double(cells[6]);
    trace.push(std::move(r));
  }
  return trace;
}

void write_trace_json(const IterateTrace& trace, std::ostream& out) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) {
    nlohmann::json j;
    j["k"] = r.k;
    j["objective"] = number_or_string(r.objective);
    j["iter_error"] = number_or_string(r.iter_error);
    j["recon_error"] = number_or_string(r.recon_error);
    j["policy"] = std::string(to_string(r.policy));
    j["block"] = r.block ? nlohmann::json(*r.block) : nlohmann::json(nullptr);
    j["wall_ms"] = number_or_string(r.wall_ms);
    records.push_back(std::move(j));
  }
  nlohmann::json doc;
  doc["records"] = std::move(records);
  doc["stop"] = std::string(to_string(trace.stop));
  out << doc.dump(1) << '\n';
}

IterateTrace parse_trace_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("trace json: ") + e.what());
  }
  IterateTrace trace;
  for (const auto& j : doc.at("records")) {
    IterateRecord r;
    r.k = j.at("k").get<int>();
    r.objective = json_number(j.at("objective"));
    r.iter_error = json_number(j.at("iter_error"));
    r.recon_error = json_number(j.at("recon_error"));
    r.policy = parse_policy(j.at("policy").get<std::string>());
    if (!j.at("block").is_null()) r.block = j.at("block").get<int>();
    r.wall_ms = json_number(j.at("wall_ms"));
    trace.push(std::move(r));
  }
  const auto stop = doc.value("stop", std::string("none"));
  trace.stop = stop == "tolerance" ? StopReason::Tolerance
               : stop == "budget"  ? StopReason::Budget
                                   : StopReason::None;
  return trace;
}

bool same_serialized_fields(const IterateTrace& a, const IterateTrace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.k != y.k || !same_double(x.objective, y.objective) ||
        !same_double(x.iter_error, y.iter_error) || !same_double(x.recon_error, y.recon_error) ||
        x.policy != y.policy || x.block != y.block || !same_double(x.wall_ms, y.wall_ms))
      return false;
  }
  return true;
}

}  // namespace fima

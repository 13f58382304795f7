#include "sprayconn/report.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace sprayconn {

CheckRecord CheckRecord::make(std::string id, std::size_t samples, double residual,
                              double tolerance, std::string note) {
  CheckRecord r;
  r.id = std::move(id);
  r.samples = samples;
  r.max_residual = residual;
  r.tolerance = tolerance;
  r.pass = !std::isnan(residual) && residual <= tolerance;
  r.note = std::move(note);
  return r;
}

CheckRecord CheckRecord::make_at_least(std::string id, std::size_t samples,
                                       double residual, double threshold,
                                       std::string note) {
  CheckRecord r = make(std::move(id), samples, residual, threshold, std::move(note));
  r.pass = !std::isnan(residual) && residual >= threshold;
  if (r.note.empty()) r.note = "negative control: residual must reach the tolerance";
  return r;
}

CheckRecord CheckRecord::error(std::string id, std::string message) {
  CheckRecord r;
  r.id = std::move(id);
  r.max_residual = std::nan("");
  r.pass = false;
  r.note = std::move(message);
  return r;
}

bool Report::pass() const {
  for (const auto& r : records)
    if (!r.pass) return false;
  return true;
}

const CheckRecord* Report::first_failure() const {
  for (const auto& r : records)
    if (!r.pass) return &r;
  return nullptr;
}

void Report::append(const Report& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  for (const auto& [k, v] : other.tolerances) tolerances.emplace(k, v);
}

std::string Report::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["suite"] = suite;
  j["manifold"] = manifold;
  j["pass"] = pass();
  ordered_json env;
  env["seed"] = seed;
  env["truncation_level"] = level;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : tolerances) tol[k] = v;
  env["tolerances"] = tol;
  j["environment"] = env;
  ordered_json recs = ordered_json::array();
  for (const auto& r : records) {
    ordered_json o;
    o["id"] = r.id;
    o["samples"] = r.samples;
    if (std::isfinite(r.max_residual))
      o["max_residual"] = r.max_residual;
    else
      o["max_residual"] = nullptr;
    o["tolerance"] = r.tolerance;
    o["pass"] = r.pass;
    if (r.skipped) o["skipped"] = r.skipped;
    if (!r.note.empty()) o["note"] = r.note;
    recs.push_back(o);
  }
  j["records"] = recs;
  j["timestamp"] = timestamp;
  return j.dump(2);
}

std::string Report::to_table() const {
  std::string out;
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%-4s %-52s residual=%-12.4g tol=%-10.3g n=%zu",
                  r.pass ? "PASS" : "FAIL", r.id.c_str(), r.max_residual,
                  r.tolerance, r.samples);
    out += buf;
    if (!r.note.empty() && !r.pass) out += "  (" + r.note + ")";
    out += '\n';
  }
  return out;
}

}  // namespace sprayconn

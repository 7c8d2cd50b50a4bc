#include "rbm/report.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace rbm {

const char* to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Pass:
      return "pass";
    case RowStatus::Fail:
      return "fail";
    case RowStatus::Inconclusive:
      return "inconclusive";
    case RowStatus::Info:
      return "info";
  }
  return "info";
}

bool ExperimentReport::pass() const {
  for (const auto& r : rows)
    if (r.status == RowStatus::Fail) return false;
  return true;
}

bool ExperimentReport::inconclusive() const {
  for (const auto& r : rows)
    if (r.status == RowStatus::Inconclusive) return true;
  return false;
}

long ExperimentReport::n_paths() const {
  auto it = config.find("n_paths");
  return it == config.end() ? 0 : std::stol(it->second);
}

double ExperimentReport::dt() const {
  auto it = config.find("dt");
  return it == config.end() ? 0.0 : std::stod(it->second);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv_header(std::ostream& os) {
  os << "experiment,geometry,n_paths,dt,epsilon,quantity,mean,std_error,z,pass\n";
}

void write_csv(std::ostream& os, const ExperimentReport& rep) {
  for (const auto& r : rep.rows) {
    os << rep.experiment << ',' << rep.geometry << ',' << rep.n_paths() << ','
       << format_double(rep.dt()) << ',' << format_double(r.epsilon) << ',' << r.quantity << ','
       << format_double(r.est.mean) << ',' << format_double(r.est.std_error) << ','
       << format_double(r.z) << ',' << to_string(r.status) << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<ExperimentReport>& reps) {
  nlohmann::ordered_json root;
  bool all_pass = true;
  bool any_inconclusive = false;
  root["reports"] = nlohmann::ordered_json::array();
  for (const auto& rep : reps) {
    nlohmann::ordered_json jr;
    jr["experiment"] = rep.experiment;
    jr["geometry"] = rep.geometry;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : rep.config) cfg[k] = v;
    jr["config"] = cfg;
    jr["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
      jr["rows"].push_back({{"quantity", r.quantity},
                            {"epsilon", format_double(r.epsilon)},
                            {"mean", format_double(r.est.mean)},
                            {"std_error", format_double(r.est.std_error)},
                            {"n", r.est.n},
                            {"z", format_double(r.z)},
                            {"status", to_string(r.status)}});
    }
    jr["pass"] = rep.pass();
    jr["inconclusive"] = rep.inconclusive();
    all_pass = all_pass && rep.pass();
    any_inconclusive = any_inconclusive || rep.inconclusive();
    root["reports"].push_back(jr);
  }
  root["all_pass"] = all_pass;
  root["any_inconclusive"] = any_inconclusive;
  os << root.dump(2) << '\n';
}

}  // namespace rbm

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rbm/stats.hpp"

namespace rbm {

enum class RowStatus { Pass, Fail, Inconclusive, Info };

const char* to_string(RowStatus s);

/// One tested quantity of an experiment.
struct ReportRow {
  std::string quantity;
  Estimate est;
  double z = 0.0;           // z-score against the declared criterion (0 for info rows)
  RowStatus status = RowStatus::Info;
  double epsilon = 0.0;     // flow parameter when applicable, else 0
};

/// Deterministic, self-describing result of one experiment run.
struct ExperimentReport {
  std::string experiment;
  std::string geometry;
  std::map<std::string, std::string> config;  // echoed, sorted by key
  std::vector<ReportRow> rows;

  bool pass() const;          // no Fail rows
  bool inconclusive() const;  // at least one Inconclusive row

  long n_paths() const;
  double dt() const;
};

/// Appends rows in the fixed schema:
/// experiment,geometry,n_paths,dt,epsilon,quantity,mean,std_error,z,pass
void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const ExperimentReport& rep);

/// JSON summary of several reports with config echo and an overall flag.
void write_json(std::ostream& os, const std::vector<ExperimentReport>& reps);

/// Fixed-width float formatting used by every artifact (byte-reproducible).
std::string format_double(double v);

}  // namespace rbm

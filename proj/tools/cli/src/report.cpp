#include "report.hpp"

#include <cstdio>
#include <fstream>

namespace factorcov::cli {
namespace {

json stat(const SummaryStat& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

json slope(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"standard_error", f.standard_error}};
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const ExperimentReport& r) {
  json points = json::array();
  for (const auto& pt : r.points) {
    points.push_back({{"p", pt.p},
                      {"n", pt.n},
                      {"seed", pt.seed},
                      {"replications", pt.replications},
                      {"max_error", stat(pt.max_error)},
                      {"operator_error", stat(pt.operator_error)},
                      {"frobenius_error", stat(pt.frobenius_error)},
                      {"residual_term", stat(pt.residual_term)},
                      {"zero_fraction", stat(pt.zero_fraction)},
                      {"coverage_frequency", pt.coverage_frequency},
                      {"coverage_standard_error", pt.coverage_standard_error},
                      {"sigma_inflated", pt.sigma_inflated}});
  }
  json slopes = json::object();
  for (const auto& [name, fit] : r.fitted_slopes) slopes[name] = slope(fit);
  return {{"kind", r.kind},
          {"axis", r.axis},
          {"c0", r.c0},
          {"alpha", r.alpha},
          {"replications", r.replications},
          {"seed", r.seed},
          {"points", points},
          {"fitted_slopes", slopes},
          {"warnings", r.warnings}};
}

json to_json(const IdentificationSweep& s) {
  json points = json::array();
  for (const auto& pt : s.points) points.push_back({{"p", pt.p}, {"max_norm_error", pt.max_norm_error}});
  return {{"kind", "identify"},
          {"k", s.k},
          {"seed", s.seed},
          {"points", points},
          {"fitted_slopes", {{"max_norm_error", slope(s.slope)}}},
          {"warnings", json::array()}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path);
}

void write_points_csv(const std::string& path, const ExperimentReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << "p,n,replications,max_error_mean,max_error_sd,operator_error_mean,operator_error_sd,"
         "frobenius_error_mean,frobenius_error_sd,residual_term_mean,residual_term_sd,"
         "zero_fraction_mean,zero_fraction_sd,coverage_frequency,coverage_standard_error\n";
  for (const auto& pt : r.points) {
    out << pt.p << ',' << pt.n << ',' << pt.replications;
    for (const auto* s : {&pt.max_error, &pt.operator_error, &pt.frobenius_error,
                          &pt.residual_term, &pt.zero_fraction}) {
      out << ',' << g17(s->mean) << ',' << g17(s->sd);
    }
    out << ',' << g17(pt.coverage_frequency) << ',' << g17(pt.coverage_standard_error) << '\n';
  }
}

void write_points_csv(const std::string& path, const IdentificationSweep& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << "p,max_norm_error\n";
  for (const auto& pt : s.points) out << pt.p << ',' << g17(pt.max_norm_error) << '\n';
}

std::string points_csv_path(const std::string& report_path) {
  const auto slash = report_path.find_last_of('/');
  const auto dot = report_path.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? report_path.substr(0, dot) : report_path;
  const std::string csv = stem + ".csv";
  return csv == report_path ? report_path + ".points.csv" : csv;
}

}  // namespace factorcov::cli

#include <charconv>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "cqed/analysis.hpp"

namespace cqed {
namespace {

using nlohmann::json;

// NaN and infinities have no JSON spelling; emit null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

void put(std::ostream& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, r.ptr - buf);
}

}  // namespace

std::string to_json(const HistogramData& h) {
  json j;
  j["kind"] = "histogram";
  j["units"] = {{"edges", "ns"}, {"values", std::string(to_string(h.norm))}};
  j["normalization"] = std::string(to_string(h.norm));
  j["exposure_pulses"] = h.exposure;
  j["edges_ns"] = nums(h.edges_ns);
  j["counts"] = nums(h.counts);
  j["values"] = nums(h.values);
  return j.dump(2) + "\n";
}

std::string to_json(const G2Result& g) {
  json j;
  j["kind"] = "g2_pulsed";
  j["units"] = {{"window", "ns"}, {"rate", "coincidences per pulse pair"}};
  j["window_ns"] = g.window_ns;
  j["n_pulses"] = g.n_pulses;
  j["lags"] = g.lags;
  j["coincidences"] = nums(g.coincidences);
  j["rate"] = nums(g.rate);
  j["errors"] = nums(g.errors);
  j["suppression"] = num(g.suppression);
  j["suppression_error"] = num(g.suppression_error);
  j["empty"] = g.empty;
  return j.dump(2) + "\n";
}

std::string to_json(const FitResult& f) {
  json j;
  j["kind"] = "wavepacket_fit";
  j["units"] = {{"omega_prime", "rad_per_us"}, {"damping", "1/us"}, {"sigma_omega", "rad_per_us"},
                {"t0", "ns"}, {"amplitude", "counts"}, {"offset", "counts"}};
  j["omega_prime"] = num(f.omega_prime);
  j["omega_prime_mhz"] = num(units::angular_to_mhz(f.omega_prime));
  j["omega_prime_error"] = num(f.omega_prime_error());
  j["damping"] = num(f.damping);
  j["amplitude"] = num(f.amplitude);
  j["offset"] = num(f.offset);
  j["t0_ns"] = num(f.t0_ns);
  j["sigma_omega"] = num(f.sigma_omega);
  j["sigma_fitted"] = f.sigma_fitted;
  j["parameters"] = f.names;
  json cov = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(num(f.covariance(r, c)));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["chi2"] = num(f.chi2);
  j["dof"] = f.dof;
  j["reduced_chi2"] = num(f.reduced_chi2);
  j["degenerate"] = f.degenerate;
  if (!f.note.empty()) j["note"] = f.note;
  return j.dump(2) + "\n";
}

std::string to_json(const ExponentialFit& f) {
  json j;
  j["kind"] = "exponential_fit";
  j["units"] = {{"tau", "ns"}};
  j["tau_ns"] = num(f.tau_ns);
  j["tau_error_ns"] = num(f.tau_error_ns);
  j["amplitude"] = num(f.amplitude);
  j["offset"] = num(f.offset);
  j["reduced_chi2"] = num(f.reduced_chi2);
  return j.dump(2) + "\n";
}

std::string to_json(const HyperbolaFit& f) {
  json j;
  j["kind"] = "hyperbola_fit";
  j["units"] = {{"g", "rad_per_us"}};
  j["g"] = num(f.g);
  j["g_error"] = num(f.g_error);
  j["g_mhz"] = num(units::angular_to_mhz(f.g));
  j["g_error_mhz"] = num(units::angular_to_mhz(f.g_error));
  j["chi2"] = num(f.chi2);
  j["dof"] = f.dof;
  j["reduced_chi2"] = num(f.reduced_chi2);
  j["weighted"] = f.weighted;
  if (!f.warning.empty()) j["warning"] = f.warning;
  return j.dump(2) + "\n";
}

std::string to_json(const SpectrumData& s) {
  json j;
  j["kind"] = "output_spectrum";
  j["units"] = {{"omega", "rad_per_us"}, {"density", "per rad_per_us"}, {"duration", "us"}};
  j["peaks"] = nums(s.peaks);
  j["separation"] = num(s.separation);
  j["separation_mhz"] = num(units::angular_to_mhz(s.separation));
  j["duration_us"] = s.duration;
  j["emission_probability"] = num(s.emission_probability);
  j["integral"] = num(s.integral);
  j["leakage"] = num(s.leakage);
  j["points"] = s.omega.size();
  return j.dump(2) + "\n";
}

std::string to_json(const DifferenceSignal& d) {
  json j;
  j["kind"] = "cavity_pump_difference";
  j["units"] = {{"t", "ns"}};
  j["n0"] = num(d.n0);
  j["t_ref_ns"] = d.t_ref_ns;
  j["t_ns"] = nums(d.t_ns);
  j["measured"] = nums(d.measured);
  j["reference"] = nums(d.reference);
  j["difference"] = nums(d.difference);
  return j.dump(2) + "\n";
}

void write_csv(std::ostream& out, const HistogramData& h) {
  out << "t_ns," << to_string(h.norm) << "\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    put(out, h.center(i));
    out << ',';
    put(out, h.values[i]);
    out << '\n';
  }
}

void write_csv(std::ostream& out, const SpectrumData& s) {
  out << "omega_rad_per_us,density\n";
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    put(out, s.omega[i]);
    out << ',';
    put(out, s.density[i]);
    out << '\n';
  }
}

void write_csv(std::ostream& out, const DifferenceSignal& d) {
  out << "t_ns,measured,reference,difference\n";
  for (std::size_t i = 0; i < d.t_ns.size(); ++i) {
    put(out, d.t_ns[i]);
    out << ',';
    put(out, d.measured[i]);
    out << ',';
    put(out, d.reference[i]);
    out << ',';
    put(out, d.difference[i]);
    out << '\n';
  }
}

}  // namespace cqed

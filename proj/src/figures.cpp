#include "cqed/figures.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/units.hpp"

namespace cqed {
namespace {

namespace fs = std::filesystem;

// Master-equation run on a half-bin grid so that even indices are bin edges
// and odd indices bin centres.
EvolutionResult half_bin_reference(const DriveScenario& resolved, double bin_ns, double window_ns) {
  MasterOptions opt;
  opt.dt_output = units::ns_to_us(0.5 * bin_ns);
  const auto rho0 = DensityMatrix::from_state(resolved.initial_state());
  return evolve_master(rho0, resolved.params, &resolved.pulse, 0.0, units::ns_to_us(window_ns), opt);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write " + p.string());
  f.precision(17);
  return f;
}

}  // namespace

ChiSquare pearson_chi_square(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw InputError("chi-square needs equal-length count vectors");
  ChiSquare c;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 5.0) continue;
    const double d = observed[i] - expected[i];
    c.chi2 += d * d / expected[i];
    ++c.dof;
  }
  c.p_value = c.dof > 0 ? boost::math::gamma_q(0.5 * static_cast<double>(c.dof), 0.5 * c.chi2) : 0.0;
  return c;
}

std::vector<double> expected_counts(const SimulatedHistogram& sim, const PipelineOptions& o) {
  const DriveScenario& sc = sim.experiment.scenario;
  const EvolutionResult ref = half_bin_reference(sc, o.bin_ns, o.window_ns);
  const auto obs = static_cast<std::size_t>(sc.observed_channel);
  const double n = static_cast<double>(sim.experiment.n_pulses);
  std::vector<double> e;
  for (std::size_t i = 0; i < sim.histogram.bins(); ++i) {
    const double dp = ref.cumulative[2 * i + 2][obs] - ref.cumulative[2 * i][obs];
    const double darks = 2.0 * o.chain.dark_count_rate * sim.histogram.width(i) * 1e-9;
    e.push_back(n * (dp * (1.0 + sc.two_atom_fraction) * o.chain.survival() + darks));
  }
  return e;
}

SimulatedHistogram simulate_histogram(const DriveScenario& scenario, const PipelineOptions& o, HistogramNorm norm) {
  DriveScenario sc = scenario;
  sc.window = units::ns_to_us(o.window_ns);
  SimulatedHistogram s;
  s.experiment = run_pulsed_experiment(sc, o.chain, o.n_pulses, o.seed, o.run);
  s.clicks = strip_tags(s.experiment.records);
  s.histogram = arrival_histogram(s.clicks, o.bin_ns, o.window_ns, norm, o.n_pulses);
  return s;
}

WavepacketFitOptions fit_options_for(const DriveScenario& scenario, double sigma_omega) {
  WavepacketFitOptions f;
  f.sigma_omega = sigma_omega;
  f.pulse_center_ns = units::us_to_ns(scenario.pulse.center());
  f.pulse_fwhm_ns = units::us_to_ns(scenario.pulse.fwhm);
  f.fit_start_ns = units::us_to_ns(scenario.pulse.support_end());
  return f;
}

SweepResult detuning_sweep(const std::vector<double>& detunings_mhz, const PipelineOptions& o, double sigma_omega) {
  if (detunings_mhz.empty()) throw InputError("detuning sweep needs at least one detuning");
  SweepResult r;
  std::vector<HyperbolaPoint> pts;
  for (std::size_t i = 0; i < detunings_mhz.size(); ++i) {
    const DriveScenario sc = detuned_preset(units::mhz_to_angular(detunings_mhz[i]));
    PipelineOptions po = o;
    po.seed = derive_seed(o.seed, i);
    const SimulatedHistogram sim = simulate_histogram(sc, po);
    FitResult fit = fit_wavepacket(sim.histogram, sc.params, fit_options_for(sc, sigma_omega));
    r.points.push_back({sc.params.delta_ac, fit, sim.clicks.size()});
    pts.push_back({sc.params.delta_ac, fit.omega_prime, fit.omega_prime_error()});
  }
  r.hyperbola = fit_hyperbola(pts);
  return r;
}

double normalized_sup_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw InputError("curves must have equal, non-zero length");
  const double ma = *std::max_element(a.begin(), a.end());
  const double mb = *std::max_element(b.begin(), b.end());
  if (!(ma > 0.0) || !(mb > 0.0)) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] / ma - b[i] / mb));
  return dev;
}

double first_extremum(std::span<const double> t, std::span<const double> y, bool maximum) {
  const double sign = maximum ? 1.0 : -1.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double y0 = sign * y[i - 1], y1 = sign * y[i], y2 = sign * y[i + 1];
    if (y1 > y0 && y1 >= y2) {
      const double denom = y0 - 2.0 * y1 + y2;
      const double delta = denom < 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
      return t[i] + delta * (t[i + 1] - t[i]);
    }
  }
  return std::nan("");
}

ComplementarityResult complementarity(const PipelineOptions& o) {
  ComplementarityResult r;
  const DriveScenario atom = preset("cavity-pump-atom");
  r.atom = simulate_histogram(atom, o, HistogramNorm::per_pulse);
  PipelineOptions oe = o;
  oe.seed = derive_seed(o.seed, 1);
  r.empty = simulate_histogram(preset("cavity-pump-empty"), oe, HistogramNorm::per_pulse);

  CavityPumpOptions co;
  co.t_ref_ns = units::us_to_ns(atom.pulse.center());
  co.start_ns = units::us_to_ns(atom.pulse.support_end());
  r.difference = cavity_pump_difference(r.atom.histogram, atom.params, co, &r.empty.histogram);

  const DriveScenario transverse = preset("resonant").resolved();
  const EvolutionResult ref = half_bin_reference(transverse, o.bin_ns, o.window_ns);
  for (std::size_t i = 0; i < r.atom.histogram.bins(); ++i) {
    if (r.atom.histogram.center(i) < co.start_ns) continue;
    const std::size_t k = 2 * i + 1;
    r.transverse_excited.push_back(ref.excited_population[k]);
    r.transverse_photons.push_back(ref.photon_number[k]);
  }
  r.deviation_excited = normalized_sup_deviation(r.difference.difference, r.transverse_excited);
  r.deviation_photons = normalized_sup_deviation(r.difference.difference, r.transverse_photons);
  r.atom_first_minimum_ns = first_extremum(r.difference.t_ns, r.difference.measured, false);
  r.difference_first_maximum_ns = first_extremum(r.difference.t_ns, r.difference.difference, true);
  return r;
}

double global_maximum(std::span<const double> t, std::span<const double> y) {
  const std::size_t i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (i == 0 || i + 1 >= y.size()) return t[i];
  const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
  const double delta = denom < 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
  return t[i] + delta * (t[i + 1] - t[i]);
}

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5"};
  return names;
}

FigureReport make_figure(std::string_view name, const std::string& out_dir, const PipelineOptions& o) {
  if (std::find(figure_names().begin(), figure_names().end(), name) == figure_names().end())
    throw InputError("unknown figure '" + std::string(name) + "'; options: fig2, fig3, fig4, fig5");
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  FigureReport rep;
  rep.name = std::string(name);
  auto file = [&](const std::string& f) {
    rep.files.push_back((dir / f).string());
    return open_out(dir / f);
  };

  if (name == "fig2") {
    const DriveScenario res = preset("resonant");
    const SimulatedHistogram sim = simulate_histogram(res, o);
    const DriveScenario resolved = sim.experiment.scenario;
    const EvolutionResult ref = half_bin_reference(resolved, o.bin_ns, o.window_ns);
    const HistogramData& h = sim.histogram;
    const std::vector<double> expected = expected_counts(sim, o);
    std::vector<double> centres, counts;
    for (std::size_t i = 0; i < h.bins(); ++i) {
      centres.push_back(h.center(i));
      counts.push_back(h.counts[i]);
    }
    const ChiSquare chi = pearson_chi_square(counts, expected);
    const SimulatedHistogram fs_sim = simulate_histogram(preset("free-space"), o);
    const WavepacketFitOptions fo = fit_options_for(resolved);
    const ExponentialFit ex = fit_exponential(fs_sim.histogram, fo.fit_start_ns);

    double total = 0.0, total_fs = 0.0;
    for (double c : h.counts) total += c;
    for (double c : fs_sim.histogram.counts) total_fs += c;
    auto out = file("fig2_wavepacket.csv");
    out << "t_ns,histogram_unit_area,master_equation_unit_area,free_space_unit_area,free_space_exponential\n";
    double exp_total = 0.0;
    for (double e : expected) exp_total += e;
    const double lifetime_ns = units::us_to_ns(1.0 / (2.0 * res.params.gamma));
    for (std::size_t i = 0; i < h.bins(); ++i) {
      const double w = h.width(i);
      const double t = h.center(i);
      const double expo = t >= fo.pulse_center_ns ? std::exp(-(t - fo.pulse_center_ns) / lifetime_ns) : 0.0;
      out << t << ',' << h.counts[i] / (total * w) << ',' << expected[i] / (exp_total * w) << ','
          << fs_sim.histogram.counts[i] / (total_fs * w) << ',' << expo << '\n';
    }
    const double peak = global_maximum(centres, counts);
    std::vector<double> flux;
    for (std::size_t i = 0; i < h.bins(); ++i) flux.push_back(ref.detected_flux[2 * i + 1]);
    const double peak_me = first_extremum(centres, flux, true);
    rep.summary.push_back("histogram maximum: " + fmt(peak - fo.pulse_center_ns) + " ns after the pulse centre");
    rep.summary.push_back("master-equation flux first maximum: " + fmt(peak_me - fo.pulse_center_ns) + " ns after the pulse centre");
    rep.summary.push_back("chi2 histogram vs master equation: " + fmt(chi.chi2) + " / " + std::to_string(chi.dof) +
                          " dof, p = " + fmt(chi.p_value));
    rep.summary.push_back("free-space decay constant: " + fmt(ex.tau_ns) + " +- " + fmt(ex.tau_error_ns) +
                          " ns (bare-atom 1/(2 gamma) = " + fmt(lifetime_ns) + " ns)");
  } else if (name == "fig3") {
    const std::vector<double> dets = {0.0, 10.0, 20.0, 30.0};
    auto out = file("fig3_histograms.csv");
    auto fits = file("fig3_fits.csv");
    fits << "delta_ac_mhz,omega_prime_mhz,omega_prime_error_mhz,damping_per_us,reduced_chi2,expected_mhz\n";
    std::vector<SimulatedHistogram> sims;
    std::vector<FitResult> fr;
    std::vector<DriveScenario> scs;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      PipelineOptions po = o;
      po.seed = derive_seed(o.seed, i);
      scs.push_back(detuned_preset(units::mhz_to_angular(dets[i])));
      sims.push_back(simulate_histogram(scs.back(), po));
      fr.push_back(fit_wavepacket(sims.back().histogram, scs.back().params, fit_options_for(scs.back())));
      const auto& p = scs.back().params;
      const double expect = units::angular_to_mhz(std::sqrt(4 * p.g * p.g + p.delta_ac * p.delta_ac));
      fits << dets[i] << ',' << units::angular_to_mhz(fr.back().omega_prime) << ','
           << units::angular_to_mhz(fr.back().omega_prime_error()) << ',' << fr.back().damping << ','
           << fr.back().reduced_chi2 << ',' << expect << '\n';
      rep.summary.push_back("delta_ac = " + fmt(dets[i]) + " MHz: Omega'/2pi = " +
                            fmt(units::angular_to_mhz(fr.back().omega_prime)) + " +- " +
                            fmt(units::angular_to_mhz(fr.back().omega_prime_error())) + " MHz (expected " + fmt(expect) + ")");
    }
    out << "t_ns";
    for (double d : dets) out << ",counts_" << d << "MHz,fit_" << d << "MHz";
    out << '\n';
    const HistogramData& h0 = sims.front().histogram;
    for (std::size_t b = 0; b < h0.bins(); ++b) {
      out << h0.center(b);
      for (std::size_t i = 0; i < dets.size(); ++i) {
        const FitResult& f = fr[i];
        out << ',' << sims[i].histogram.counts[b] << ','
            << wavepacket_model(h0.center(b), f.amplitude, f.damping, f.omega_prime, f.offset, f.t0_ns, f.sigma_omega);
      }
      out << '\n';
    }
  } else if (name == "fig4") {
    const SweepResult sw = detuning_sweep(kSweepDetuningsMhz, o);
    auto pts = file("fig4_points.csv");
    pts << "delta_ac_mhz,omega_prime_mhz,omega_prime_error_mhz,clicks\n";
    for (const auto& p : sw.points)
      pts << units::angular_to_mhz(p.delta_ac) << ',' << units::angular_to_mhz(p.fit.omega_prime) << ','
          << units::angular_to_mhz(p.fit.omega_prime_error()) << ',' << p.clicks << '\n';
    auto curve = file("fig4_hyperbola.csv");
    curve << "delta_ac_mhz,omega_prime_fit_mhz,omega_prime_input_mhz\n";
    const double g_in = SystemParams::canonical().g;
    for (int k = -400; k <= 400; ++k) {
      const double d = units::mhz_to_angular(0.1 * k);
      curve << 0.1 * k << ',' << units::angular_to_mhz(std::sqrt(4 * sw.hyperbola.g * sw.hyperbola.g + d * d)) << ','
            << units::angular_to_mhz(std::sqrt(4 * g_in * g_in + d * d)) << '\n';
    }
    rep.summary.push_back("g_fit/2pi = " + fmt(units::angular_to_mhz(sw.hyperbola.g)) + " +- " +
                          fmt(units::angular_to_mhz(sw.hyperbola.g_error)) + " MHz (input " +
                          fmt(units::angular_to_mhz(g_in)) + ")");
    rep.summary.push_back("reduced chi2 = " + fmt(sw.hyperbola.reduced_chi2) + " (" + std::to_string(sw.hyperbola.dof) + " dof)");
  } else {
    const ComplementarityResult c = complementarity(o);
    auto out = file("fig5_complementarity.csv");
    out << "t_ns,atom_per_pulse,empty_per_pulse,reference,difference,transverse_excited,transverse_photons\n";
    std::size_t k = 0;
    for (std::size_t i = 0; i < c.atom.histogram.bins(); ++i) {
      const double t = c.atom.histogram.center(i);
      out << t << ',' << c.atom.histogram.values[i] << ',' << c.empty.histogram.values[i];
      if (k < c.difference.t_ns.size() && c.difference.t_ns[k] == t) {
        out << ',' << c.difference.reference[k] << ',' << c.difference.difference[k] << ','
            << c.transverse_excited[k] << ',' << c.transverse_photons[k];
        ++k;
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
    rep.summary.push_back("D(t) vs transverse <sigma+ sigma->: normalized sup deviation " + fmt(c.deviation_excited));
    rep.summary.push_back("D(t) vs transverse <a^dag a>: normalized sup deviation " + fmt(c.deviation_photons));
    rep.summary.push_back("cavity-pump histogram first minimum " + fmt(c.atom_first_minimum_ns) +
                          " ns; D(t) first maximum " + fmt(c.difference_first_maximum_ns) + " ns");
  }

  auto sum = file("summary.txt");
  sum << rep.name << " (" << o.n_pulses << " pulses, seed " << o.seed << ", " << o.run.shards << " shards)\n";
  for (const auto& l : rep.summary) sum << "  " << l << '\n';
  return rep;
}

}  // namespace cqed

// cqedsim: pulsed atom-cavity photon source simulation and click analysis.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cqed/analysis.hpp"
#include "cqed/detection.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/figures.hpp"
#include "cqed/manifest.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/units.hpp"

namespace fs = std::filesystem;
using namespace cqed;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string help_footer() {
  std::ostringstream s;
  s << "Presets:\n";
  for (const auto& n : preset_names()) s << "  " << n << (n == "detuned" ? "[:<MHz>]" : "") << "\n";
  s << "\nUnits:\n"
       "  frequencies and rates   linear MHz (nu = omega / 2pi) on the command line and in\n"
       "                          scenario files with \"units\": \"MHz_linear\"; rad/us with\n"
       "                          \"units\": \"rad_per_us\"\n"
       "  times                   ns (--bins, --window, click times, *_ns keys)\n"
       "  dark-count rate         counts/s per detector\n"
       "\nExit codes: 0 ok, 2 input or schema error, 3 numerical non-convergence,\n"
       "4 internal invariant violation.\n";
  return s.str();
}

// Removes everything it tracked unless released.
class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)), created_dir_(!fs::exists(dir_)) {
    fs::create_directories(dir_);
  }
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (released_) return;
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
    if (created_dir_) fs::remove(dir_, ec);  // only if empty
  }
  fs::path track(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }
  void release() { released_ = true; }

 private:
  fs::path dir_;
  bool created_dir_;
  bool released_ = false;
  std::vector<fs::path> files_;
};

std::ofstream open_file(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(p, mode);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

void write_file(const fs::path& p, const std::string& text) {
  auto f = open_file(p);
  f << text;
  if (!f) throw InputError("write failed: " + p.string());
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string scenario_file, preset_name, manifest_file, chain_file, out = "run";
  std::size_t pulses = 100000, shards = 8, threads = default_threads();
  std::uint64_t seed = 42;
  double window_ns = 200.0;
  CLI::Option* pulses_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* shards_opt = nullptr;
  CLI::Option* window_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a) {
  RunManifest m;
  if (!a.manifest_file.empty()) {
    m = load_manifest(a.manifest_file);
    if (a.pulses_opt->count()) m.n_pulses = a.pulses;
    if (a.seed_opt->count()) m.seed = a.seed;
    if (a.shards_opt->count()) m.shards = a.shards;
  } else {
    if (!a.scenario_file.empty()) {
      m.scenario = load_scenario(a.scenario_file);
      m.scenario_ref = a.scenario_file;
    } else {
      m.scenario = preset(a.preset_name.empty() ? "resonant" : a.preset_name);
      m.scenario_ref = a.preset_name.empty() ? "resonant" : a.preset_name;
    }
    m.n_pulses = a.pulses_opt->count() ? a.pulses : m.scenario.n_pulses;
    m.seed = a.seed;
    m.shards = a.shards;
  }
  if (!a.chain_file.empty()) m.chain = chain_from_json(read_text(a.chain_file));
  if (a.window_opt->count()) m.scenario.window = units::ns_to_us(a.window_ns);
  if (m.n_pulses == 0) throw InputError("--pulses must be at least 1");
  if (m.shards == 0) throw InputError("--shards must be at least 1");
  m.scenario.validate();
  m.chain.validate();
  m.version = kToolVersion;
  m.outputs = {"clicks.csv", "clicks.bin", "reference_flux.csv", "manifest.json"};

  OutputGuard guard(a.out);
  const ExperimentResult r =
      run_pulsed_experiment(m.scenario, m.chain, m.n_pulses, m.seed, {m.shards, std::max<std::size_t>(1, a.threads)});
  const std::vector<Click> clicks = strip_tags(r.records);
  {
    auto f = open_file(guard.track("clicks.csv"));
    write_clicks_csv(f, clicks);
  }
  {
    auto f = open_file(guard.track("clicks.bin"), std::ios::out | std::ios::binary);
    write_clicks_binary(f, clicks);
  }
  {
    MasterOptions mo;
    mo.dt_output = units::ns_to_us(0.1);
    const auto& sc = r.scenario;
    const EvolutionResult ev = evolve_master(DensityMatrix::from_state(sc.initial_state()), sc.params, &sc.pulse, 0.0,
                                             sc.window, mo);
    const auto obs = static_cast<std::size_t>(sc.observed_channel);
    const double scale = (1.0 + sc.two_atom_fraction) * m.chain.survival() * 1e-3;
    auto f = open_file(guard.track("reference_flux.csv"));
    f.precision(12);
    f << "t_ns,excited_population,photon_number,detected_flux_per_us,cumulative_observed,expected_click_rate_per_ns\n";
    for (std::size_t i = 0; i < ev.times.size(); ++i) {
      // Observed-channel rate from the cumulative record by central differences.
      const std::size_t lo = i == 0 ? 0 : i - 1, hi = std::min(i + 1, ev.times.size() - 1);
      const double rate = (ev.cumulative[hi][obs] - ev.cumulative[lo][obs]) / (ev.times[hi] - ev.times[lo]);
      f << units::us_to_ns(ev.times[i]) << ',' << ev.excited_population[i] << ',' << ev.photon_number[i] << ','
        << ev.detected_flux[i] << ',' << ev.cumulative[i][obs] << ',' << rate * scale << '\n';
    }
  }
  write_file(guard.track("manifest.json"), manifest_to_json(m));
  guard.release();

  std::cout << "pulses " << r.n_pulses << ", clicks " << clicks.size() << ", observed jumps " << r.observed_jumps
            << ", two-atom pulses " << r.two_atom_pulses << "\n"
            << "wrote " << a.out << "/{clicks.csv,clicks.bin,reference_flux.csv,manifest.json}\n";
  return 0;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string clicks, manifest, sweep, out;
  std::vector<std::string> analyses = {"histogram", "wavepacket"};
  double bins_ns = 2.5, window_ns = 200.0, sigma_mhz = 0.0;
  int max_lag = 5;
};

const std::vector<std::string> kAnalyses = {"histogram", "wavepacket", "exponential", "g2"};

std::optional<RunManifest> manifest_near(const std::string& explicit_path, const fs::path& dir) {
  if (!explicit_path.empty()) return load_manifest(explicit_path);
  const fs::path p = dir / "manifest.json";
  if (fs::exists(p)) return load_manifest(p.string());
  return std::nullopt;
}

fs::path clicks_in(const fs::path& dir) {
  for (const char* n : {"clicks.bin", "clicks.csv"})
    if (fs::exists(dir / n)) return dir / n;
  throw InputError("no clicks.bin or clicks.csv in " + dir.string());
}

int cmd_analyze_sweep(const AnalyzeArgs& a) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(a.sweep)) throw InputError("not a directory: " + a.sweep);
  for (const auto& e : fs::directory_iterator(a.sweep))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw InputError("no run directories with manifest.json under " + a.sweep);

  const fs::path out = a.out.empty() ? fs::path(a.sweep) : fs::path(a.out);
  fs::create_directories(out);
  std::vector<HyperbolaPoint> pts;
  auto csv = open_file(out / "sweep_points.csv");
  csv.precision(12);
  csv << "run,delta_ac_mhz,omega_prime_mhz,omega_prime_error_mhz,reduced_chi2\n";
  SystemParams first;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const RunManifest m = load_manifest((dirs[i] / "manifest.json").string());
    if (i == 0) first = m.scenario.params;
    const std::vector<Click> clicks = read_clicks_file(clicks_in(dirs[i]).string());
    const HistogramData h = arrival_histogram(clicks, a.bins_ns, units::us_to_ns(m.scenario.window));
    const FitResult f =
        fit_wavepacket(h, m.scenario.params, fit_options_for(m.scenario, units::mhz_to_angular(a.sigma_mhz)));
    pts.push_back({m.scenario.params.delta_ac, f.omega_prime, f.omega_prime_error()});
    csv << dirs[i].filename().string() << ',' << units::angular_to_mhz(m.scenario.params.delta_ac) << ','
        << units::angular_to_mhz(f.omega_prime) << ',' << units::angular_to_mhz(f.omega_prime_error()) << ','
        << f.reduced_chi2 << '\n';
  }
  const HyperbolaFit hf = fit_hyperbola(pts);
  write_file(out / "hyperbola.json", to_json(hf));
  if (!hf.warning.empty()) std::cerr << "warning: " << hf.warning << "\n";
  std::cout << "g_fit/2pi = " << units::angular_to_mhz(hf.g) << " +- " << units::angular_to_mhz(hf.g_error)
            << " MHz (scenario " << units::angular_to_mhz(first.g) << "), reduced chi2 " << hf.reduced_chi2 << " over "
            << pts.size() << " runs\n";
  return 0;
}

int cmd_analyze(const AnalyzeArgs& a) {
  if (!a.sweep.empty()) return cmd_analyze_sweep(a);
  if (a.clicks.empty()) throw InputError("analyze needs --clicks or --sweep");
  for (const auto& s : a.analyses)
    if (std::find(kAnalyses.begin(), kAnalyses.end(), s) == kAnalyses.end())
      throw InputError("unknown analysis '" + s + "'; options: histogram, wavepacket, exponential, g2");

  const fs::path clicks_path(a.clicks);
  const std::vector<Click> clicks = read_clicks_file(a.clicks);
  const auto manifest = manifest_near(a.manifest, clicks_path.parent_path());
  DriveScenario sc = manifest ? manifest->scenario : preset("resonant");
  if (!manifest) std::cerr << "warning: no manifest found; using the resonant preset as fit prior\n";
  const std::size_t n_pulses = manifest ? manifest->n_pulses : 0;
  const fs::path out = a.out.empty() ? clicks_path.parent_path() : fs::path(a.out);
  if (!out.empty()) fs::create_directories(out);

  auto wants = [&](const char* n) { return std::find(a.analyses.begin(), a.analyses.end(), n) != a.analyses.end(); };
  const HistogramData h = arrival_histogram(clicks, a.bins_ns, a.window_ns);
  if (wants("histogram")) {
    write_file(out / "histogram.json", to_json(h));
    auto f = open_file(out / "histogram.csv");
    write_csv(f, h);
    std::cout << "histogram: " << clicks.size() << " clicks in " << h.bins() << " bins\n";
  }
  if (wants("wavepacket")) {
    const FitResult f = fit_wavepacket(h, sc.params, fit_options_for(sc, units::mhz_to_angular(a.sigma_mhz)));
    write_file(out / "wavepacket_fit.json", to_json(f));
    std::cout << "wavepacket: Omega'/2pi = " << units::angular_to_mhz(f.omega_prime) << " +- "
              << units::angular_to_mhz(f.omega_prime_error()) << " MHz, reduced chi2 " << f.reduced_chi2 << "\n";
    if (f.degenerate) std::cerr << "warning: " << f.note << "\n";
  }
  if (wants("exponential")) {
    const ExponentialFit f = fit_exponential(h, units::us_to_ns(sc.pulse.support_end()));
    write_file(out / "exponential_fit.json", to_json(f));
    std::cout << "exponential: tau = " << f.tau_ns << " +- " << f.tau_error_ns << " ns\n";
  }
  if (wants("g2")) {
    const G2Result g = g2_pulsed(clicks, a.window_ns, a.max_lag, n_pulses);
    write_file(out / "g2.json", to_json(g));
    if (g.empty)
      std::cerr << "warning: click file is empty; g2 result is empty\n";
    else
      std::cout << "g2: suppression " << g.suppression << " +- " << g.suppression_error << "\n";
  }
  return 0;
}

// ---- figure, spectrum, presets ------------------------------------------------

struct FigureArgs {
  std::string name, out = "figures";
  std::size_t pulses = 100000, shards = 8, threads = default_threads();
  std::uint64_t seed = 42;
  double bins_ns = 2.5, window_ns = 200.0;
  std::string chain_file;
};

int cmd_figure(const FigureArgs& a) {
  PipelineOptions o;
  o.n_pulses = a.pulses;
  o.seed = a.seed;
  o.run = {a.shards, std::max<std::size_t>(1, a.threads)};
  o.bin_ns = a.bins_ns;
  o.window_ns = a.window_ns;
  if (!a.chain_file.empty()) o.chain = chain_from_json(read_text(a.chain_file));
  if (o.n_pulses == 0) throw InputError("--pulses must be at least 1");
  const FigureReport rep = make_figure(a.name, (fs::path(a.out) / a.name).string(), o);
  for (const auto& l : rep.summary) std::cout << l << "\n";
  for (const auto& f : rep.files) std::cout << "wrote " << f << "\n";
  return 0;
}

int cmd_spectrum(const std::string& preset_name, const std::string& scenario_file, const std::string& out) {
  const DriveScenario sc = scenario_file.empty() ? preset(preset_name) : load_scenario(scenario_file);
  const SpectrumData s = output_spectrum(sc.params);
  fs::create_directories(out);
  write_file(fs::path(out) / "spectrum.json", to_json(s));
  auto f = open_file(fs::path(out) / "spectrum.csv");
  write_csv(f, s);
  const auto& p = sc.params;
  std::cout << "peaks (MHz):";
  for (double w : s.peaks) std::cout << ' ' << units::angular_to_mhz(w);
  std::cout << "\nseparation " << units::angular_to_mhz(s.separation) << " MHz, sqrt(4g^2+delta^2)/2pi = "
            << units::angular_to_mhz(std::sqrt(4 * p.g * p.g + p.delta_ac * p.delta_ac)) << " MHz\n";
  return 0;
}

int cmd_presets(bool json) {
  for (const auto& n : preset_names()) {
    const DriveScenario s = preset(n);
    if (json) {
      std::cout << scenario_to_json(s, FrequencyUnits::mhz_linear);
      continue;
    }
    const auto& p = s.params;
    std::printf("%-18s g %.3f  kappa %.3f  gamma %.3f  delta_ac %.3f MHz  %s pulse %.1f ns  observe %s\n", n.c_str(),
                units::angular_to_mhz(p.g), units::angular_to_mhz(p.kappa), units::angular_to_mhz(p.gamma),
                units::angular_to_mhz(p.delta_ac), std::string(to_string(s.pulse.port)).c_str(),
                units::us_to_ns(s.pulse.fwhm), std::string(to_string(s.observed_channel)).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed atom-cavity single-photon source simulation and click analysis.", "cqedsim"};
  app.footer(help_footer());
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run pulses and write click records, reference flux and a manifest");
  auto* src = sim->add_option_group("source");
  src->add_option("--scenario", sa.scenario_file, "Scenario JSON file")->check(CLI::ExistingFile);
  src->add_option("--preset", sa.preset_name, "Preset name (default resonant)");
  src->add_option("--manifest", sa.manifest_file, "Re-run a previous manifest")->check(CLI::ExistingFile);
  src->require_option(0, 1);
  sa.pulses_opt = sim->add_option("--pulses", sa.pulses, "Number of pulses (default: the scenario's n_pulses)")->capture_default_str();
  sa.seed_opt = sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sa.shards_opt = sim->add_option("--shards", sa.shards, "Shard count (part of the result)")->capture_default_str();
  sim->add_option("--threads", sa.threads, "Worker threads (does not change results)");
  sim->add_option("--out", sa.out, "Output directory")->capture_default_str();
  sa.window_opt = sim->add_option("--window", sa.window_ns, "Detection window after the trigger (ns)")->capture_default_str();
  sim->add_option("--chain", sa.chain_file, "Detection chain JSON")->check(CLI::ExistingFile);

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "Histogram, fits and g2 on a click file; hyperbola over a sweep");
  ana->add_option("--clicks", aa.clicks, "Click file (.csv or .bin)")->check(CLI::ExistingFile);
  ana->add_option("--sweep", aa.sweep, "Directory of simulate runs to fit the detuning hyperbola over");
  ana->add_option("--manifest", aa.manifest, "Manifest for the fit prior (default: next to the clicks)");
  ana->add_option("--analysis", aa.analyses, "histogram, wavepacket, exponential, g2")->delimiter(',')->capture_default_str();
  ana->add_option("--bins", aa.bins_ns, "Histogram bin width (ns)")->capture_default_str();
  ana->add_option("--window", aa.window_ns, "Analysis window (ns)")->capture_default_str();
  ana->add_option("--max-lag", aa.max_lag, "Largest g2 pulse lag")->capture_default_str();
  ana->add_option("--sigma", aa.sigma_mhz, "Dephasing width in the fit model (MHz)")->capture_default_str();
  ana->add_option("--out", aa.out, "Output directory (default: next to the input)");

  FigureArgs fa;
  auto* fig = app.add_subcommand("figure", "Simulate and analyze one figure's data bundle (fig2, fig3, fig4, fig5)");
  fig->add_option("name", fa.name, "Figure name")->required();
  fig->add_option("--out", fa.out, "Output directory")->capture_default_str();
  fig->add_option("--pulses", fa.pulses, "Pulses per simulated histogram")->capture_default_str();
  fig->add_option("--seed", fa.seed, "Master seed")->capture_default_str();
  fig->add_option("--shards", fa.shards, "Shard count")->capture_default_str();
  fig->add_option("--threads", fa.threads, "Worker threads");
  fig->add_option("--bins", fa.bins_ns, "Histogram bin width (ns)")->capture_default_str();
  fig->add_option("--window", fa.window_ns, "Detection window (ns)")->capture_default_str();
  fig->add_option("--chain", fa.chain_file, "Detection chain JSON")->check(CLI::ExistingFile);

  std::string sp_preset = "resonant", sp_file, sp_out = "spectrum";
  auto* spc = app.add_subcommand("spectrum", "Output spectrum of a single emitted photon from |e,0>");
  spc->add_option("--preset", sp_preset, "Preset name")->capture_default_str();
  spc->add_option("--scenario", sp_file, "Scenario JSON file")->check(CLI::ExistingFile);
  spc->add_option("--out", sp_out, "Output directory")->capture_default_str();

  bool presets_json = false;
  auto* pre = app.add_subcommand("presets", "List presets");
  pre->add_flag("--json", presets_json, "Print each preset as a scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::input);
  }

  try {
    if (*sim) return cmd_simulate(sa);
    if (*ana) return cmd_analyze(aa);
    if (*fig) return cmd_figure(fa);
    if (*spc) return cmd_spectrum(sp_preset, sp_file, sp_out);
    if (*pre) return cmd_presets(presets_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::invariant);
  }
  return 0;
}

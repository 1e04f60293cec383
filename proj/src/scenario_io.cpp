#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cqed/errors.hpp"
#include "cqed/scenarios.hpp"
#include "cqed/units.hpp"

namespace cqed {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError(path + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw InputError(path + "." + key + ": unknown key");
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path + ": expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw InputError(path + ": expected a string");
  return j.get<std::string>();
}

// Reads an optional numeric field, leaving `out` untouched when absent.
void read(const json& obj, const std::string& path, const char* key, double& out, double scale = 1.0) {
  if (obj.contains(key)) out = number(obj.at(key), path + "." + key) * scale;
}

template <class F>
auto annotate(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    std::string msg = e.what();
    if (msg.starts_with("$")) throw;
    throw InputError(path + ": " + msg);
  }
}

}  // namespace

std::string_view to_string(FrequencyUnits u) {
  return u == FrequencyUnits::mhz_linear ? "MHz_linear" : "rad_per_us";
}

Channel channel_from_string(std::string_view s) {
  for (Channel c : {Channel::cavity_detected, Channel::cavity_loss, Channel::free_space})
    if (to_string(c) == s) return c;
  throw InputError("unknown channel '" + std::string(s) +
                   "' (cavity-detected | cavity-loss | free-space)");
}

std::string scenario_to_json(const DriveScenario& s, FrequencyUnits units) {
  const double f = units == FrequencyUnits::mhz_linear ? 1.0 / units::two_pi : 1.0;
  json j;
  j["name"] = s.name;
  j["units"] = std::string(to_string(units));
  j["params"] = {{"g", s.params.g * f},
                 {"kappa", s.params.kappa * f},
                 {"gamma", s.params.gamma * f},
                 {"delta_ac", s.params.delta_ac * f},
                 {"eta_out", s.params.eta_out}};
  j["hilbert"] = {{"n_max", s.hilbert.n_max}};
  json p;
  p["shape"] = std::string(to_string(s.pulse.shape));
  p["fwhm_ns"] = units::us_to_ns(s.pulse.fwhm);
  p["peak_amplitude"] = s.pulse.peak_amplitude ? json(*s.pulse.peak_amplitude * f) : json(nullptr);
  p["carrier_detuning"] = s.pulse.carrier_detuning * f;
  p["port"] = std::string(to_string(s.pulse.port));
  p["repetition_period_us"] = s.pulse.repetition_period;
  p["cw_background"] = s.pulse.cw_background * f;
  if (s.pulse.shape == PulseShape::table) {
    json t = json::array();
    for (const auto& [time, v] : s.pulse.table) t.push_back({units::us_to_ns(time), v});
    p["table_ns"] = t;
  }
  j["pulse"] = p;
  j["initial"] = {{"atom", s.initial.atom == 0 ? "g" : "e"}, {"photons", s.initial.photons}};
  j["p_exc"] = s.p_exc;
  j["two_atom_fraction"] = s.two_atom_fraction;
  j["observed_channel"] = std::string(to_string(s.observed_channel));
  j["n_pulses"] = s.n_pulses;
  j["window_ns"] = units::us_to_ns(s.window);
  return j.dump(2) + "\n";
}

DriveScenario scenario_from_json(std::string_view input) {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario is not valid JSON: ") + e.what());
  }
  check_keys(j, "$", {"name", "units", "preset", "params", "hilbert", "pulse", "initial", "p_exc",
                      "two_atom_fraction", "observed_channel", "n_pulses", "window_ns"});
  if (!j.contains("units")) throw InputError("$.units: required (MHz_linear | rad_per_us)");
  const std::string u = text(j.at("units"), "$.units");
  double f = 1.0;
  if (u == "MHz_linear") f = units::two_pi;
  else if (u != "rad_per_us") throw InputError("$.units: expected MHz_linear or rad_per_us, got '" + u + "'");

  DriveScenario s;
  if (j.contains("preset")) s = annotate("$.preset", [&] { return preset(text(j.at("preset"), "$.preset")); });
  else {
    s.params = SystemParams::canonical();
    s.name = "custom";
  }
  if (j.contains("name")) s.name = text(j.at("name"), "$.name");

  if (j.contains("params")) {
    const json& p = j.at("params");
    check_keys(p, "$.params", {"g", "kappa", "gamma", "delta_ac", "eta_out"});
    read(p, "$.params", "g", s.params.g, f);
    read(p, "$.params", "kappa", s.params.kappa, f);
    read(p, "$.params", "gamma", s.params.gamma, f);
    read(p, "$.params", "delta_ac", s.params.delta_ac, f);
    read(p, "$.params", "eta_out", s.params.eta_out);
    annotate("$.params", [&] { s.params.validate(); return 0; });
  }
  if (j.contains("hilbert")) {
    const json& h = j.at("hilbert");
    check_keys(h, "$.hilbert", {"n_max"});
    if (h.contains("n_max")) {
      if (!h.at("n_max").is_number_integer()) throw InputError("$.hilbert.n_max: expected an integer");
      s.hilbert.n_max = h.at("n_max").get<int>();
    }
    annotate("$.hilbert", [&] { s.hilbert.validate(); return 0; });
  }
  if (j.contains("pulse")) {
    const json& p = j.at("pulse");
    const std::string path = "$.pulse";
    check_keys(p, path, {"shape", "fwhm_ns", "peak_amplitude", "carrier_detuning", "port",
                         "repetition_period_us", "cw_background", "table_ns"});
    if (p.contains("shape"))
      s.pulse.shape = annotate(path + ".shape", [&] { return pulse_shape_from_string(text(p.at("shape"), path + ".shape")); });
    if (p.contains("fwhm_ns")) s.pulse.fwhm = units::ns_to_us(number(p.at("fwhm_ns"), path + ".fwhm_ns"));
    if (p.contains("peak_amplitude")) {
      if (p.at("peak_amplitude").is_null()) s.pulse.peak_amplitude.reset();
      else s.pulse.peak_amplitude = number(p.at("peak_amplitude"), path + ".peak_amplitude") * f;
    }
    read(p, path, "carrier_detuning", s.pulse.carrier_detuning, f);
    if (p.contains("port"))
      s.pulse.port = annotate(path + ".port", [&] { return drive_port_from_string(text(p.at("port"), path + ".port")); });
    read(p, path, "repetition_period_us", s.pulse.repetition_period);
    read(p, path, "cw_background", s.pulse.cw_background, f);
    if (p.contains("table_ns")) {
      const json& t = p.at("table_ns");
      if (!t.is_array()) throw InputError(path + ".table_ns: expected an array of [t_ns, value] pairs");
      s.pulse.table.clear();
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string ip = path + ".table_ns[" + std::to_string(i) + "]";
        if (!t[i].is_array() || t[i].size() != 2) throw InputError(ip + ": expected [t_ns, value]");
        s.pulse.table.emplace_back(units::ns_to_us(number(t[i][0], ip)), number(t[i][1], ip));
      }
    }
    annotate(path, [&] { s.pulse.validate(); return 0; });
  }
  if (j.contains("initial")) {
    const json& in = j.at("initial");
    check_keys(in, "$.initial", {"atom", "photons"});
    if (in.contains("atom")) {
      const std::string a = text(in.at("atom"), "$.initial.atom");
      if (a != "g" && a != "e") throw InputError("$.initial.atom: expected \"g\" or \"e\"");
      s.initial.atom = a == "e" ? 1 : 0;
    }
    if (in.contains("photons")) {
      if (!in.at("photons").is_number_integer()) throw InputError("$.initial.photons: expected an integer");
      s.initial.photons = in.at("photons").get<int>();
    }
  }
  read(j, "$", "p_exc", s.p_exc);
  read(j, "$", "two_atom_fraction", s.two_atom_fraction);
  if (j.contains("observed_channel"))
    s.observed_channel = annotate("$.observed_channel", [&] {
      return channel_from_string(text(j.at("observed_channel"), "$.observed_channel"));
    });
  if (j.contains("n_pulses")) {
    if (!j.at("n_pulses").is_number_unsigned()) throw InputError("$.n_pulses: expected a non-negative integer");
    s.n_pulses = j.at("n_pulses").get<std::size_t>();
  }
  if (j.contains("window_ns")) s.window = units::ns_to_us(number(j.at("window_ns"), "$.window_ns"));
  annotate("$", [&] { s.validate(); return 0; });
  return s;
}

DriveScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace cqed

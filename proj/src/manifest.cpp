#include "cqed/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cqed/errors.hpp"

namespace cqed {
namespace {

using nlohmann::json;

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError(path + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (!allowed.contains(k)) throw InputError(path + "." + k + ": unknown key");
}

json chain_json(const DetectionChain& c) {
  return {{"directionality", c.directionality},
          {"path_and_modematch", c.path_and_modematch},
          {"detector_qe", c.detector_qe},
          {"dark_count_rate_hz", c.dark_count_rate},
          {"hbt_split_ratio", c.hbt_split_ratio},
          {"dead_time_ns", c.dead_time},
          {"jitter_ns", c.jitter}};
}

DetectionChain chain_from(const json& j, const std::string& path) {
  only_keys(j, path, {"directionality", "path_and_modematch", "detector_qe", "dark_count_rate_hz",
                      "hbt_split_ratio", "dead_time_ns", "jitter_ns"});
  DetectionChain c;
  auto rd = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw InputError(path + "." + key + ": expected a number");
    out = j.at(key).get<double>();
  };
  rd("directionality", c.directionality);
  rd("path_and_modematch", c.path_and_modematch);
  rd("detector_qe", c.detector_qe);
  rd("dark_count_rate_hz", c.dark_count_rate);
  rd("hbt_split_ratio", c.hbt_split_ratio);
  rd("dead_time_ns", c.dead_time);
  rd("jitter_ns", c.jitter);
  try {
    c.validate();
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
  return c;
}

}  // namespace

std::string chain_to_json(const DetectionChain& c) { return chain_json(c).dump(2) + "\n"; }

DetectionChain chain_from_json(std::string_view text) { return chain_from(parse(text, "chain"), "$"); }

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["tool"] = "cqedsim";
  j["version"] = m.version;
  j["scenario_ref"] = m.scenario_ref;
  j["scenario"] = json::parse(scenario_to_json(m.scenario));
  j["chain"] = chain_json(m.chain);
  j["n_pulses"] = m.n_pulses;
  j["seed"] = m.seed;
  j["shards"] = m.shards;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  const json j = parse(text, "manifest");
  only_keys(j, "$", {"tool", "version", "scenario_ref", "scenario", "chain", "n_pulses", "seed", "shards", "outputs"});
  for (const char* k : {"scenario", "chain", "n_pulses", "seed", "shards"})
    if (!j.contains(k)) throw InputError(std::string("$.") + k + ": required");
  RunManifest m;
  if (j.contains("version")) m.version = j.at("version").get<std::string>();
  if (j.contains("scenario_ref")) m.scenario_ref = j.at("scenario_ref").get<std::string>();
  try {
    m.scenario = scenario_from_json(j.at("scenario").dump());
  } catch (const InputError& e) {
    throw InputError(std::string("$.scenario: ") + e.what());
  }
  m.chain = chain_from(j.at("chain"), "$.chain");
  for (const char* k : {"n_pulses", "seed", "shards"})
    if (!j.at(k).is_number_unsigned()) throw InputError(std::string("$.") + k + ": expected a non-negative integer");
  m.n_pulses = j.at("n_pulses").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.shards = j.at("shards").get<std::size_t>();
  if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return manifest_from_json(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace cqed

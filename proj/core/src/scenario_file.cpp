#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "tactile/error.hpp"
#include "tactile/synth.hpp"

namespace tactile::synth {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  const std::string where =
      mark.is_null() ? "" : "line " + std::to_string(mark.line + 1) + ": ";
  throw Error(Errc::kParseError, where + msg);
}

template <typename T>
T get(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "invalid value for '" + what + "'");
  }
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!map.IsMap()) fail(map, "'" + where + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const YAML::Node& map, const char* key, T& out) {
  if (const YAML::Node n = map[key]) out = get<T>(n, key);
}

optics::ScatterSurface parse_surface(const YAML::Node& node) {
  const auto text = get<std::string>(node, "surface");
  if (text == "lambertian") return optics::ScatterSurface::lambertian();
  if (text == "specular") return optics::ScatterSurface::specular();
  const std::string prefix = "gaussian:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      return optics::ScatterSurface::gaussian(std::stod(text.substr(prefix.size())));
    } catch (const Error& e) {
      fail(node, e.what());
    } catch (const std::exception&) {
      fail(node, "bad gaussian angle in '" + text + "'");
    }
  }
  fail(node, "surface must be lambertian, specular or gaussian:<deg>");
}

ObjectSpec parse_object(const YAML::Node& node) {
  check_keys(node, {"material", "fill", "temperature_c", "gas_noise_scale"}, "object");
  const YAML::Node m = node["material"];
  if (!m) fail(node, "object needs a material");
  const auto name = get<std::string>(m, "material");
  const auto mat = parse_object_material(name);
  if (!mat) fail(m, "unknown material '" + name + "'");
  ObjectSpec obj = ObjectSpec::solid(*mat);
  if (const YAML::Node f = node["fill"]) {
    const double fill = get<double>(f, "fill");
    if (!(fill >= 0.0 && fill <= 1.0)) fail(f, "fill must lie in [0, 1]");
    obj.fill_fraction = fill;
  }
  read_opt(node, "temperature_c", obj.temperature_c);
  read_opt(node, "gas_noise_scale", obj.gas.noise_scale);
  return obj;
}

ScenarioEvent parse_event(const YAML::Node& node) {
  check_keys(node, {"kind", "start", "end", "fingers", "object", "position", "force"}, "event");
  ScenarioEvent ev;
  const YAML::Node kind = node["kind"];
  if (!kind) fail(node, "event needs a kind");
  const auto k = parse_event_kind(get<std::string>(kind, "kind"));
  if (!k) fail(kind, "unknown event kind '" + kind.as<std::string>() + "'");
  ev.kind = *k;
  if (!node["start"] || !node["end"]) fail(node, "event needs start and end");
  ev.t_start_s = get<double>(node["start"], "start");
  ev.t_end_s = get<double>(node["end"], "end");
  if (!(ev.t_end_s > ev.t_start_s)) fail(node["end"], "event end must be after start");
  if (const YAML::Node f = node["fingers"]) {
    if (!f.IsSequence()) fail(f, "fingers must be a list");
    ev.fingers.clear();
    for (const auto& x : f) ev.fingers.push_back(get<unsigned>(x, "fingers"));
  }
  ev.object = node["object"] ? parse_object(node["object"]) : ObjectSpec::solid(ObjectMaterial::kWood);
  read_opt(node, "position", ev.position);
  read_opt(node, "force", ev.force);
  return ev;
}

ScenarioScript parse_root(const YAML::Node& root) {
  if (!root.IsMap()) fail(root, "scenario must be a mapping");
  check_keys(root,
             {"seed", "duration_s", "fingers", "modalities", "visuotactile_rate_hz",
              "audio_rate_hz", "audio_frame", "noise", "ringdown", "gas", "visuo", "events"},
             "scenario");
  ScenarioScript s;
  read_opt(root, "seed", s.seed);
  read_opt(root, "duration_s", s.duration_s);
  read_opt(root, "fingers", s.fingers);
  read_opt(root, "visuotactile_rate_hz", s.visuotactile_rate_hz);
  read_opt(root, "audio_rate_hz", s.audio_rate_hz);
  read_opt(root, "audio_frame", s.audio_frame);

  if (const YAML::Node m = root["modalities"]) {
    if (!m.IsSequence()) fail(m, "modalities must be a list");
    s.modalities.clear();
    for (const auto& x : m) {
      const auto kind = parse_modality(get<std::string>(x, "modalities"));
      if (!kind) fail(x, "unknown modality '" + x.as<std::string>() + "'");
      s.modalities.push_back(*kind);
    }
  }
  if (const YAML::Node n = root["noise"]) {
    check_keys(n, {"pressure", "audio_counts", "inertial", "heat", "visuo_counts"}, "noise");
    read_opt(n, "pressure", s.noise.pressure);
    read_opt(n, "audio_counts", s.noise.audio_counts);
    read_opt(n, "inertial", s.noise.inertial);
    read_opt(n, "heat", s.noise.heat);
    read_opt(n, "visuo_counts", s.visuo.noise_sigma);
  }
  if (const YAML::Node r = root["ringdown"]) {
    check_keys(r, {"f0_hz", "k_fill", "tau_base_s", "tau_per_position_s"}, "ringdown");
    read_opt(r, "f0_hz", s.ringdown.f0_hz);
    read_opt(r, "k_fill", s.ringdown.k_fill);
    read_opt(r, "tau_base_s", s.ringdown.tau_base_s);
    read_opt(r, "tau_per_position_s", s.ringdown.tau_per_position_s);
  }
  if (const YAML::Node g = root["gas"]) {
    check_keys(g, {"tau_s", "rate_hz", "sample_noise", "approach_jitter", "ambient_jitter"}, "gas");
    read_opt(g, "tau_s", s.gas.tau_s);
    read_opt(g, "rate_hz", s.gas.rate_hz);
    read_opt(g, "sample_noise", s.gas.sample_noise);
    read_opt(g, "approach_jitter", s.gas.approach_jitter);
    read_opt(g, "ambient_jitter", s.gas.ambient_jitter);
  }
  if (const YAML::Node v = root["visuo"]) {
    check_keys(v, {"surface", "photons", "render_seed", "background_level"}, "visuo");
    if (v["surface"]) s.visuo.surface = parse_surface(v["surface"]);
    read_opt(v, "photons", s.visuo.photons);
    read_opt(v, "render_seed", s.visuo.render_seed);
    read_opt(v, "background_level", s.visuo.background_level);
  }
  if (const YAML::Node evs = root["events"]) {
    if (!evs.IsSequence()) fail(evs, "events must be a list");
    for (const auto& e : evs) s.events.push_back(parse_event(e));
  }

  try {
    validate_script(s);
  } catch (const Error& e) {
    if (e.code() == Errc::kOverlappingEvents) throw;
    throw Error(Errc::kParseError, e.what());
  }
  return s;
}

}  // namespace

ScenarioScript parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(Errc::kParseError,
                "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return parse_root(root);
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace tactile::synth

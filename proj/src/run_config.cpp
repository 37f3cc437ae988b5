#include "ccident/run_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace ccident {

using Json = nlohmann::ordered_json;

namespace {

struct Worked {
  const char* preset;
  const char* system;
  double amplitude, omega, x0, v0;       // training run
  double val_a, val_omega, val_x0, val_v0;  // validation run
};

// Worked examples of the two detailed studies.
constexpr Worked kWorked[] = {
    {"paper-3.1", "van_der_pol", 0.834, 1.512, -0.353, -0.408, 1.384, 1.578,
     0.458, 0.033},
    {"paper-3.2", "stick_slip", 2.0, 0.363, -0.076, 0.146, 1.396, 0.306, 0.464,
     -0.117},
};

Json params_json(const ParamMap& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Json base_document(const std::string& system, double a, double w, double x0,
                   double v0, double va, double vw, double vx0, double vv0) {
  return Json{{"system", {{"name", system}, {"params", params_json(default_params(system))}}},
              {"forcing", {{"amplitude", a}, {"omega", w}}},
              {"init", {{"x0", x0}, {"v0", v0}}},
              {"validation",
               {{"amplitude", va}, {"omega", vw}, {"x0", vx0}, {"v0", vv0}}}};
}

Json worked_document(const Worked& w) {
  return base_document(w.system, w.amplitude, w.omega, w.x0, w.v0, w.val_a,
                       w.val_omega, w.val_x0, w.val_v0);
}

Json protocol_json(const SamplingProtocol& p) {
  Json train = Json::object(), val = Json::object();
  for (const auto& [k, iv] : p.train) train[k] = {iv.lo, iv.hi};
  for (const auto& [k, iv] : p.validate) val[k] = {iv.lo, iv.hi};
  return {{"train", train},
          {"validate", val},
          {"n_train", p.n_train},
          {"n_val_per_train", p.n_val_per_train}};
}

Json preset_document(const std::string& preset, const std::string& system) {
  for (const Worked& w : kWorked) {
    if (preset != w.preset) continue;
    if (!system.empty() && system != w.system)
      throw ConfigError("preset " + preset + " is defined for system " +
                        w.system + ", not " + system);
    return worked_document(w);
  }
  if (preset == "paper-sweep") {
    const std::string sys = system.empty() ? "van_der_pol" : system;
    for (const Worked& w : kWorked) {
      if (sys != w.system) continue;
      Json doc = worked_document(w);
      doc["protocol"] = protocol_json(sys == "van_der_pol" ? van_der_pol_protocol(0)
                                                           : stick_slip_protocol(0));
      return doc;
    }
    throw ConfigError("preset paper-sweep is defined for van_der_pol and stick_slip, not " + sys);
  }
  const std::string prefix = "appendix-";
  if (preset.rfind(prefix, 0) == 0) {
    const std::string sys = preset.substr(prefix.size());
    const auto& names = registry_names();
    if (std::find(names.begin(), names.end(), sys) == names.end())
      throw ConfigError("unknown preset '" + preset + "'");
    if (!system.empty() && system != sys)
      throw ConfigError("preset " + preset + " is defined for system " + sys +
                        ", not " + system);
    const TrueSystem s = make_system(sys);
    // Validation: smaller drive, halved initial state.
    return base_document(sys, s.default_forcing.amplitude, s.default_forcing.omega,
                         s.default_init.x0, s.default_init.v0,
                         0.75 * s.default_forcing.amplitude, s.default_forcing.omega,
                         0.5 * s.default_init.x0, 0.5 * s.default_init.v0);
  }
  if (preset.empty()) {
    if (system.empty()) return Json::object();
    const TrueSystem s = make_system(system);
    return base_document(system, s.default_forcing.amplitude, s.default_forcing.omega,
                         s.default_init.x0, s.default_init.v0,
                         0.75 * s.default_forcing.amplitude, s.default_forcing.omega,
                         0.5 * s.default_init.x0, 0.5 * s.default_init.v0);
  }
  throw ConfigError("unknown preset '" + preset + "'");
}

// Objects merge key by key; anything else replaces.
void merge(Json& into, const Json& from) {
  if (!into.is_object() || !from.is_object()) {
    into = from;
    return;
  }
  for (auto it = from.begin(); it != from.end(); ++it) {
    if (into.contains(it.key())) merge(into[it.key()], it.value());
    else into[it.key()] = it.value();
  }
}

void set_dotted(Json& doc, const std::string& key, const Json& value) {
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("bad override key '" + key + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key()))
        throw ConfigError("unknown key '" + child(it.key()) + "'");
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  const Json& raw(const char* k) const { return j_.at(k); }
  Reader sub(const char* k) const { return Reader(j_.at(k), child(k)); }

  double number(const char* k, double fallback) const {
    if (!has(k)) return fallback;
    return number_at(k);
  }
  double number_at(const char* k) const {
    if (!has(k)) throw ConfigError("missing required key '" + child(k) + "'");
    const Json& v = j_.at(k);
    if (!v.is_number()) throw ConfigError("'" + child(k) + "' must be a number");
    return v.get<double>();
  }
  long integer(const char* k, long fallback) const {
    if (!has(k)) return fallback;
    const Json& v = j_.at(k);
    if (!v.is_number_integer())
      throw ConfigError("'" + child(k) + "' must be an integer");
    return v.get<long>();
  }
  std::string string(const char* k, const std::string& fallback) const {
    if (!has(k)) return fallback;
    const Json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError("'" + child(k) + "' must be a string");
    return v.get<std::string>();
  }
  std::string child(const std::string& k) const {
    return path_.empty() ? k : path_ + "." + k;
  }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  const Json& json() const { return j_; }

 private:
  const Json& j_;
  std::string path_;
};

std::map<std::string, Interval> intervals(const Reader& r) {
  std::map<std::string, Interval> out;
  for (auto it = r.json().begin(); it != r.json().end(); ++it) {
    const Json& v = it.value();
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError("'" + r.child(it.key()) + "' must be [lo, hi]");
    out[it.key()] = {v[0].get<double>(), v[1].get<double>()};
  }
  return out;
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

RunConfig resolve(const Json& doc, const std::string& preset) {
  RunConfig cfg;
  cfg.preset = preset;
  if (preset.empty() && doc.contains("preset") && doc["preset"].is_string())
    cfg.preset = doc["preset"].get<std::string>();
  const Reader root(doc, "");
  root.allow({"preset", "system", "forcing", "init", "validation", "integrator", "methods",
              "poly", "sindy", "nn", "protocol", "sweep_arch", "seed", "jobs",
              "out"});

  if (!root.has("system")) throw ConfigError("missing required key 'system.name'");
  const Reader sys = root.sub("system");
  sys.allow({"name", "params", "family"});
  if (!sys.has("name")) throw ConfigError("missing required key 'system.name'");
  cfg.system = sys.string("name", "");
  cfg.params = wrap("system.name", [&] { return default_params(cfg.system); });
  if (sys.has("params")) {
    const Reader p = sys.sub("params");
    cfg.params.clear();
    for (auto it = p.json().begin(); it != p.json().end(); ++it)
      cfg.params[it.key()] = p.number_at(it.key().c_str());
  }
  const TrueSystem ts = wrap("system.params", [&] { return make_system(cfg.system, cfg.params); });
  cfg.family = sys.has("family")
                   ? wrap("system.family", [&] { return parse_family(sys.string("family", "")); })
                   : ts.family;

  auto forcing = [&](double a, double w) {
    return wrap("forcing", [&] { return forcing_for(cfg.system, cfg.params, a, w); });
  };
  double a = ts.default_forcing.amplitude, w = ts.default_forcing.omega;
  if (root.has("forcing")) {
    const Reader f = root.sub("forcing");
    f.allow({"amplitude", "omega"});
    a = f.number("amplitude", a);
    w = f.number("omega", w);
  }
  cfg.forcing = forcing(a, w);
  cfg.init = ts.default_init;
  if (root.has("init")) {
    const Reader i = root.sub("init");
    i.allow({"x0", "v0"});
    cfg.init = {i.number("x0", cfg.init.x0), i.number("v0", cfg.init.v0)};
  }
  cfg.validation = cfg.training();
  if (root.has("validation")) {
    const Reader v = root.sub("validation");
    v.allow({"amplitude", "omega", "x0", "v0"});
    cfg.validation.forcing = forcing(v.number("amplitude", a), v.number("omega", w));
    cfg.validation.init = {v.number("x0", cfg.init.x0), v.number("v0", cfg.init.v0)};
  }

  if (root.has("integrator")) {
    const Reader g = root.sub("integrator");
    g.allow({"rtol", "atol", "max_step", "t_max", "n_samples"});
    IntegratorConfig& ic = cfg.integrator;
    ic.rtol = g.number("rtol", ic.rtol);
    ic.atol = g.number("atol", ic.atol);
    ic.max_step = g.number("max_step", ic.max_step);
    ic.t_max = g.number("t_max", ic.t_max);
    ic.n_samples = g.integer("n_samples", long(ic.n_samples));
  }
  wrap("integrator", [&] { cfg.integrator.validate(); return 0; });

  if (root.has("methods")) {
    const Json& m = root.raw("methods");
    if (!m.is_array() || m.empty())
      throw ConfigError("'methods' must be a non-empty array");
    cfg.methods.clear();
    for (const auto& e : m) {
      if (!e.is_string()) throw ConfigError("'methods' entries must be strings");
      const std::string s = e.get<std::string>();
      if (s == "all") cfg.methods = all_methods();
      else cfg.methods.push_back(wrap("methods", [&] { return parse_method(s); }));
    }
  }

  MethodSettings& ms = cfg.settings;
  if (root.has("poly")) {
    const Reader p = root.sub("poly");
    p.allow({"degree"});
    ms.poly_degree = int(p.integer("degree", ms.poly_degree));
  }
  if (root.has("sindy")) {
    const Reader s = root.sub("sindy");
    s.allow({"degree", "threshold", "ridge", "max_iter"});
    ms.sindy.degree = int(s.integer("degree", ms.sindy.degree));
    ms.sindy.threshold = s.number("threshold", ms.sindy.threshold);
    ms.sindy.ridge = s.number("ridge", ms.sindy.ridge);
    ms.sindy.max_iter = int(s.integer("max_iter", ms.sindy.max_iter));
  }
  if (root.has("nn")) {
    const Reader n = root.sub("nn");
    n.allow({"neurons", "layers", "activation", "epochs", "learning_rate",
             "loss_stop", "lambda_c"});
    TrainConfig& t = ms.nn;
    t.neurons = int(n.integer("neurons", t.neurons));
    t.hidden_layers = int(n.integer("layers", t.hidden_layers));
    if (n.has("activation"))
      t.activation = wrap("nn.activation", [&] { return parse_activation(n.string("activation", "")); });
    t.max_epochs = n.integer("epochs", t.max_epochs);
    t.learning_rate = n.number("learning_rate", t.learning_rate);
    t.loss_stop = n.number("loss_stop", t.loss_stop);
    t.lambda_c = n.number("lambda_c", t.lambda_c);
  }
  if (ms.poly_degree < 1) throw ConfigError("'poly.degree' must be >= 1");
  if (ms.sindy.degree < 1) throw ConfigError("'sindy.degree' must be >= 1");
  if (ms.sindy.threshold < 0 || ms.sindy.ridge < 0)
    throw ConfigError("'sindy.threshold' and 'sindy.ridge' must be >= 0");
  if (ms.nn.neurons < 1 || ms.nn.hidden_layers < 1)
    throw ConfigError("'nn.neurons' and 'nn.layers' must be >= 1");
  if (ms.nn.max_epochs < 0) throw ConfigError("'nn.epochs' must be >= 0");

  const long seed = root.integer("seed", 0);
  if (seed < 0) throw ConfigError("'seed' must be >= 0");
  cfg.seed = std::uint64_t(seed);
  ms.nn.seed = cfg.seed;

  if (root.has("protocol")) {
    const Reader p = root.sub("protocol");
    p.allow({"train", "validate", "n_train", "n_val_per_train"});
    SamplingProtocol proto;
    if (p.has("train")) proto.train = intervals(p.sub("train"));
    if (p.has("validate")) proto.validate = intervals(p.sub("validate"));
    proto.n_train = int(p.integer("n_train", proto.n_train));
    proto.n_val_per_train = int(p.integer("n_val_per_train", proto.n_val_per_train));
    proto.rng_seed = cfg.seed;
    wrap("protocol", [&] { proto.check(); return 0; });
    for (const auto& [k, iv] : proto.train)
      if (k != "A" && k != "omega" && k != "x0" && k != "v0" && !cfg.params.count(k))
        throw ConfigError("'protocol.train." + k + "' is not a parameter of " + cfg.system);
    cfg.protocol = proto;
  }

  if (root.has("sweep_arch")) {
    const Reader s = root.sub("sweep_arch");
    s.allow({"axis", "values"});
    cfg.axis = wrap("sweep_arch.axis", [&] { return parse_arch_axis(s.string("axis", "neurons")); });
    if (s.has("values")) {
      const Json& v = s.raw("values");
      if (!v.is_array()) throw ConfigError("'sweep_arch.values' must be an array");
      for (const auto& e : v)
        cfg.arch_values.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    }
  }
  if (cfg.arch_values.empty()) cfg.arch_values = default_arch_values(cfg.axis);

  const long jobs = root.integer("jobs", 1);
  if (jobs < 1) throw ConfigError("'jobs' must be >= 1");
  cfg.jobs = unsigned(jobs);
  cfg.out = root.string("out", cfg.out);
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const Worked& w : kWorked) out.emplace_back(w.preset);
  out.emplace_back("paper-sweep");
  for (const auto& n : registry_names()) out.push_back("appendix-" + n);
  return out;
}

RunConfig load_config(const ConfigSources& src) {
  Json doc = preset_document(src.preset, src.system);
  if (!src.file_text.empty()) {
    Json file;
    try {
      file = Json::parse(src.file_text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    // A file that names another system brings its own parameter record.
    if (file.contains("system") && file["system"].contains("name") &&
        doc.contains("system") && doc["system"]["name"] != file["system"]["name"])
      doc["system"].erase("params");
    // Parameter records are replaced whole, never merged key by key.
    if (file.contains("system") && file["system"].contains("params") &&
        doc.contains("system"))
      doc["system"].erase("params");
    merge(doc, file);
  }
  if (!src.system.empty()) {
    if (!doc.contains("system") || doc["system"].value("name", "") != src.system)
      merge(doc, preset_document("", src.system));
  }
  for (const auto& [key, literal] : src.overrides) {
    Json v;
    try {
      v = Json::parse(literal);
    } catch (const Json::parse_error&) {
      v = literal;
    }
    set_dotted(doc, key, v);
  }
  return resolve(doc, src.preset);
}

std::string to_json_text(const RunConfig& cfg) {
  const MethodSettings& ms = cfg.settings;
  Json methods = Json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(method_name(m)));
  Json doc = {
      {"preset", cfg.preset},
      {"system",
       {{"name", cfg.system},
        {"params", params_json(cfg.params)},
        {"family", std::string(family_name(cfg.family))}}},
      {"forcing", {{"amplitude", cfg.forcing.amplitude}, {"omega", cfg.forcing.omega}}},
      {"init", {{"x0", cfg.init.x0}, {"v0", cfg.init.v0}}},
      {"validation",
       {{"amplitude", cfg.validation.forcing.amplitude},
        {"omega", cfg.validation.forcing.omega},
        {"x0", cfg.validation.init.x0},
        {"v0", cfg.validation.init.v0}}},
      {"integrator",
       {{"rtol", cfg.integrator.rtol},
        {"atol", cfg.integrator.atol},
        {"max_step", std::isfinite(cfg.integrator.max_step) ? Json(cfg.integrator.max_step)
                                                            : Json(nullptr)},
        {"t_max", cfg.integrator.t_max},
        {"n_samples", cfg.integrator.n_samples}}},
      {"methods", methods},
      {"poly", {{"degree", ms.poly_degree}}},
      {"sindy",
       {{"degree", ms.sindy.degree},
        {"threshold", ms.sindy.threshold},
        {"ridge", ms.sindy.ridge},
        {"max_iter", ms.sindy.max_iter}}},
      {"nn",
       {{"neurons", ms.nn.neurons},
        {"layers", ms.nn.hidden_layers},
        {"activation", std::string(activation_name(ms.nn.activation))},
        {"epochs", ms.nn.max_epochs},
        {"learning_rate", ms.nn.learning_rate},
        {"loss_stop", ms.nn.loss_stop},
        {"lambda_c", ms.nn.lambda_c}}},
      {"protocol", cfg.protocol ? protocol_json(*cfg.protocol) : Json(nullptr)},
      {"sweep_arch",
       {{"axis", std::string(arch_axis_name(cfg.axis))}, {"values", cfg.arch_values}}},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"out", cfg.out}};
  return doc.dump(2) + "\n";
}

}  // namespace ccident

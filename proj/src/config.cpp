#include "specreg/config.hpp"

#include <cmath>
#include <set>

#include "specreg/csv_io.hpp"

namespace specreg {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Strict object reader: every key must be consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(where_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(where_ + "." + key + ": expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ValidationError(where_ + "." + key + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ValidationError(where_ + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(where_ + "." + key + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ValidationError(where_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json spectrum_to_json(const SpectrumSpec& s) {
  return std::visit(overloaded{[](const PolynomialSpectrumSpec& p) {
                                 return json{{"kind", "polynomial"}, {"n", p.n}, {"beta", p.beta}};
                               },
                               [](const ExponentialSpectrumSpec& e) {
                                 return json{{"kind", "exponential"}, {"n", e.n}, {"beta", e.beta}};
                               },
                               [](const CsvSpectrumSpec& c) { return json{{"kind", "csv"}, {"path", c.path}}; },
                               [](const ValuesSpectrumSpec& v) { return json{{"kind", "values"}, {"values", v.values}}; }},
                    s);
}

SpectrumSpec spectrum_from_json(const json& j) {
  ObjectReader r(j, "spectrum");
  const std::string kind = r.string("kind");
  SpectrumSpec out;
  if (kind == "polynomial" || kind == "identity") {
    PolynomialSpectrumSpec p;
    p.n = r.unsigned_integer("n");
    p.beta = kind == "identity" ? 0.0 : r.number("beta");
    out = p;
  } else if (kind == "exponential") {
    out = ExponentialSpectrumSpec{r.unsigned_integer("n"), r.number("beta")};
  } else if (kind == "csv") {
    out = CsvSpectrumSpec{r.string("path")};
  } else if (kind == "values") {
    out = ValuesSpectrumSpec{r.numbers("values")};
  } else {
    throw ValidationError("spectrum.kind: unknown kind '" + kind + "'");
  }
  r.finish();
  return out;
}

json family_to_json(const SmootherFamily& f) {
  return std::visit(overloaded{[](const Cutoff&) { return json{{"kind", "cutoff"}}; },
                               [](const Tikhonov& t) { return json{{"kind", "tikhonov"}, {"order", t.order}}; },
                               [](const Landweber& l) {
                                 json j{{"kind", "landweber"}};
                                 if (l.step != 0.0) j["step"] = l.step;
                                 return j;
                               },
                               [](const Pinsker& p) { return json{{"kind", "pinsker"}, {"nu", p.nu}}; }},
                    f);
}

SmootherFamily family_from_json(const json& j) {
  ObjectReader r(j, "family");
  const std::string kind = r.string("kind");
  SmootherFamily out;
  if (kind == "cutoff") {
    out = Cutoff{};
  } else if (kind == "tikhonov") {
    const std::uint64_t q = r.has("order") ? r.unsigned_integer("order") : 1;
    if (q < 1 || q > 64) throw ValidationError("family.order: tikhonov order must be an integer in 1..64");
    out = Tikhonov{static_cast<int>(q)};
  } else if (kind == "landweber") {
    out = Landweber{r.optional_number("step").value_or(0.0)};
  } else if (kind == "pinsker") {
    out = Pinsker{r.number("nu")};
  } else {
    throw ValidationError("family.kind: unknown kind '" + kind + "'");
  }
  r.finish();
  return out;
}

json grid_to_json(const GridSpec& g) {
  switch (g.kind) {
    case GridSpec::Kind::natural:
      return json{{"kind", "natural"}, {"count", g.count}};
    case GridSpec::Kind::geometric: {
      json j{{"kind", "geometric"}, {"count", g.count}};
      if (g.alpha_min) j["alpha_min"] = *g.alpha_min;
      if (g.alpha_max) j["alpha_max"] = *g.alpha_max;
      return j;
    }
    case GridSpec::Kind::explicit_alphas:
      return json{{"kind", "explicit"}, {"alphas", g.alphas}};
  }
  return {};
}

GridSpec grid_from_json(const json& j) {
  ObjectReader r(j, "grid");
  const std::string kind = r.string("kind");
  GridSpec g;
  if (kind == "natural") {
    g.kind = GridSpec::Kind::natural;
    g.count = r.has("count") ? r.unsigned_integer("count") : 100;
  } else if (kind == "geometric") {
    g.kind = GridSpec::Kind::geometric;
    g.count = r.has("count") ? r.unsigned_integer("count") : 100;
    g.alpha_min = r.optional_number("alpha_min");
    g.alpha_max = r.optional_number("alpha_max");
  } else if (kind == "explicit") {
    g.kind = GridSpec::Kind::explicit_alphas;
    g.alphas = r.numbers("alphas");
  } else {
    throw ValidationError("grid.kind: unknown kind '" + kind + "'");
  }
  r.finish();
  return g;
}

json signal_to_json(const SignalSpec& s) {
  return std::visit(overloaded{[](const PowerSignal& p) { return json{{"kind", "power"}, {"s", p.s}}; },
                               [](const SpikeSignal& p) { return json{{"kind", "spike"}, {"j", p.j}, {"w", p.w}}; },
                               [](const EllipsoidSignal& e) {
                                 return json{{"kind", "ellipsoid"}, {"W", e.W}, {"nu", e.nu}, {"seed", e.seed}};
                               },
                               [](const ZeroSignal&) { return json{{"kind", "zero"}}; },
                               [](const ExplicitSignal& x) { return json{{"kind", "explicit"}, {"values", x.values}}; }},
                    s);
}

SignalSpec signal_from_json(const json& j) {
  ObjectReader r(j, "signal");
  const std::string kind = r.string("kind");
  SignalSpec out;
  if (kind == "power") {
    out = PowerSignal{r.number("s")};
  } else if (kind == "spike") {
    out = SpikeSignal{r.unsigned_integer("j"), r.number("w")};
  } else if (kind == "ellipsoid") {
    out = EllipsoidSignal{r.number("W"), r.number("nu"), r.unsigned_integer("seed")};
  } else if (kind == "zero") {
    out = ZeroSignal{};
  } else if (kind == "explicit") {
    out = ExplicitSignal{r.numbers("values")};
  } else {
    throw ValidationError("signal.kind: unknown kind '" + kind + "'");
  }
  r.finish();
  return out;
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return name == other.name && spectrum == other.spectrum && family == other.family && grid == other.grid &&
         weights == other.weights && gamma == other.gamma && sigma == other.sigma && signal == other.signal &&
         n_reps == other.n_reps && seed == other.seed;
}

json to_json(const ExperimentConfig& c) {
  json j{{"name", c.name},
         {"spectrum", spectrum_to_json(c.spectrum)},
         {"family", family_to_json(c.family)},
         {"grid", grid_to_json(c.grid)},
         {"gamma", c.gamma},
         {"sigma", c.sigma},
         {"signal", signal_to_json(c.signal)},
         {"n_reps", c.n_reps},
         {"seed", c.seed}};
  if (c.weights) j["weights"] = *c.weights;
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ObjectReader r(j, "config");
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (r.has("name")) c.name = r.string("name");
  c.spectrum = spectrum_from_json(r.raw("spectrum"));
  c.family = family_from_json(r.raw("family"));
  c.grid = r.has("grid") ? grid_from_json(r.raw("grid")) : default_grid(c.family);
  if (r.has("weights")) {
    const json& w = r.raw("weights");
    if (!w.is_array()) throw ValidationError("config.weights: expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : w) {
      if (!row.is_array()) throw ValidationError("config.weights: expected an array of rows");
      std::vector<double> values;
      for (const auto& v : row) {
        if (!v.is_number()) throw ValidationError("config.weights: weights must be numbers");
        values.push_back(v.get<double>());
      }
      rows.push_back(std::move(values));
    }
    c.weights = std::move(rows);
  }
  if (r.has("gamma")) c.gamma = r.number("gamma");
  if (r.has("sigma")) c.sigma = r.number("sigma");
  if (r.has("signal")) c.signal = signal_from_json(r.raw("signal"));
  if (r.has("n_reps")) c.n_reps = r.unsigned_integer("n_reps");
  if (r.has("seed")) c.seed = r.unsigned_integer("seed");
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return builtin_config(source.substr(prefix.size()));
  const std::filesystem::path path(source);
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::shared_ptr<const Spectrum> build_spectrum(const ExperimentConfig& c) {
  return std::visit(
      overloaded{[](const PolynomialSpectrumSpec& p) {
                   return std::make_shared<const Spectrum>(make_polynomial_spectrum(p.n, p.beta));
                 },
                 [](const ExponentialSpectrumSpec& e) {
                   return std::make_shared<const Spectrum>(make_exponential_spectrum(e.n, e.beta));
                 },
                 [&](const CsvSpectrumSpec& s) {
                   std::filesystem::path p(s.path);
                   if (p.is_relative() && !c.base_dir.empty()) p = c.base_dir / p;
                   return std::make_shared<const Spectrum>(io::parse_spectrum_csv(io::read_file(p), p.string()));
                 },
                 [](const ValuesSpectrumSpec& v) { return std::make_shared<const Spectrum>(v.values); }},
      c.spectrum);
}

SmootherGrid build_config_grid(const ExperimentConfig& c, std::shared_ptr<const Spectrum> spectrum) {
  if (!c.weights) return build_grid(c.family, std::move(spectrum), c.grid);

  if (c.grid.kind != GridSpec::Kind::explicit_alphas)
    throw ValidationError("config.weights requires an explicit grid with one alpha per row");
  const auto& rows = *c.weights;
  if (rows.size() != c.grid.alphas.size())
    throw ValidationError("config.weights: " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(c.grid.alphas.size()) + " alphas");
  std::vector<double> flat;
  for (const auto& row : rows) {
    if (row.size() != spectrum->size()) throw ValidationError("config.weights: every row needs n entries");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  validate_family(c.family, *spectrum);
  // rows are kept in the given order: the first row is the maximal-smoothing end
  return SmootherGrid(std::nullopt, std::move(spectrum), c.grid.alphas, std::move(flat));
}

void validate_config(const ExperimentConfig& c) {
  if (!(c.gamma > 0.0) || !std::isfinite(c.gamma)) throw ValidationError("config.gamma: must be positive (got " + io::format_double(c.gamma) + ")");
  if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) throw ValidationError("config.sigma: must be finite and >= 0");
  if (c.n_reps < 1) throw ValidationError("config.n_reps: must be at least 1");
  const auto spectrum = build_spectrum(c);
  validate_family(c.family, *spectrum);
  if (c.grid.kind != GridSpec::Kind::explicit_alphas && c.grid.count == 0)
    throw ValidationError("config.grid.count: must be positive");
  make_signal(c.signal, *spectrum);
}

namespace {

ExperimentConfig make(std::string name, SpectrumSpec spectrum, SmootherFamily family, std::optional<GridSpec> grid,
                      double gamma, double sigma, SignalSpec signal, std::size_t reps, std::uint64_t seed) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.spectrum = std::move(spectrum);
  c.grid = grid.value_or(default_grid(family));
  c.family = std::move(family);
  c.gamma = gamma;
  c.sigma = sigma;
  c.signal = std::move(signal);
  c.n_reps = reps;
  c.seed = seed;
  return c;
}

GridSpec geometric(std::size_t count) {
  GridSpec g;
  g.kind = GridSpec::Kind::geometric;
  g.count = count;
  return g;
}

}  // namespace

const std::vector<ExperimentConfig>& builtin_configs() {
  static const std::vector<ExperimentConfig> registry = [] {
    std::vector<ExperimentConfig> out;
    out.push_back(make("default", PolynomialSpectrumSpec{200, 1.0}, Tikhonov{2}, geometric(100), 0.5, 0.05,
                       PowerSignal{1.0}, 200, 1));

    const std::vector<std::pair<std::string, SmootherFamily>> families = {
        {"cutoff", Cutoff{}}, {"tikhonov", Tikhonov{1}}, {"landweber", Landweber{}}, {"pinsker", Pinsker{1.0}}};
    // desk setting for the uniform excess-risk bound: gamma = 1, n = 200
    for (const auto& [label, family] : families)
      out.push_back(make("identity-" + label, PolynomialSpectrumSpec{200, 0.0}, family, std::nullopt, 1.0, 0.1,
                         PowerSignal{1.0}, 2000, 11));
    for (const auto& [label, family] : families)
      out.push_back(make("polynomial-" + label, PolynomialSpectrumSpec{200, 1.0}, family, std::nullopt, 1.0, 0.1,
                         PowerSignal{1.0}, 2000, 13));

    // oracle-inequality desk setting
    out.push_back(make("oracle-pinsker", PolynomialSpectrumSpec{500, 1.0}, Pinsker{1.0}, geometric(60), 0.5, 0.05,
                       PowerSignal{1.0}, 500, 7));
    out.push_back(make("oracle-tikhonov", PolynomialSpectrumSpec{500, 1.0}, Tikhonov{2}, geometric(60), 0.5, 0.05,
                       PowerSignal{1.0}, 500, 7));
    out.push_back(make("oracle-cutoff", PolynomialSpectrumSpec{500, 1.0}, Cutoff{}, geometric(60), 0.5, 0.05,
                       PowerSignal{1.0}, 500, 7));

    // first-order Tikhonov vs its second-order variant on an ill-posed spectrum
    out.push_back(make("tikhonov-failure", PolynomialSpectrumSpec{2000, 2.0}, Tikhonov{1}, geometric(100), 0.5, 1e-3,
                       PowerSignal{2.0}, 200, 3));
    out.push_back(make("tikhonov-q2", PolynomialSpectrumSpec{2000, 2.0}, Tikhonov{2}, geometric(100), 0.5, 1e-3,
                       PowerSignal{2.0}, 200, 3));

    out.push_back(make("severe-tikhonov", ExponentialSpectrumSpec{300, 0.1}, Tikhonov{2}, geometric(100), 0.5, 0.01,
                       PowerSignal{1.0}, 200, 5));
    out.push_back(make("large-tikhonov", PolynomialSpectrumSpec{10000, 1.0}, Tikhonov{2}, geometric(100), 0.5, 0.01,
                       PowerSignal{1.0}, 20, 9));
    return out;
  }();
  return registry;
}

const ExperimentConfig& builtin_config(const std::string& name) {
  for (const auto& c : builtin_configs())
    if (c.name == name) return c;
  std::string known;
  for (const auto& c : builtin_configs()) known += (known.empty() ? "" : ", ") + c.name;
  throw ValidationError("unknown builtin config '" + name + "' (known: " + known + ")");
}

}  // namespace specreg

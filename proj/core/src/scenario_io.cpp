#include "slicelab/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "slicelab/errors.hpp"
#include "slicelab/penalty.hpp"

namespace slicelab {

std::vector<std::string> check_scenario_config(const ScenarioConfig& c) {
  auto out = check_scenario(c.scenario, c.new_slice);
  try {
    check_sim_config(c.sim);
  } catch (const InvariantViolation& e) {
    out.insert(out.end(), e.violations().begin(), e.violations().end());
  }
  try {
    check_osra_config(c.osra);
  } catch (const InvariantViolation& e) {
    out.insert(out.end(), e.violations().begin(), e.violations().end());
  }
  if (c.penalty_exponent != 1 && c.penalty_exponent != 2) {
    out.push_back(fmt::format("penalty_exponent {} must be 1 or 2", c.penalty_exponent));
  }
  if (!(c.baseline.budget_split > 0.0 && c.baseline.budget_split < 1.0)) {
    out.push_back(fmt::format("baseline.budget_split {} must be in (0,1)", c.baseline.budget_split));
  }
  if (!(c.baseline.margin >= 0.0)) out.push_back("baseline.margin must be >= 0");
  if (!(c.baseline.histogram_bin_ms > 0.0)) out.push_back("baseline.histogram_bin_ms must be > 0");
  if (c.seeds.empty()) out.emplace_back("seeds must not be empty");
  for (const auto& [id, eta] : c.osra.eta_by_slice) {
    if (!c.scenario.has_slice(id)) out.push_back(fmt::format("osra.eta_by_slice refers to unknown slice {}", id));
  }
  return out;
}

void validate_scenario_config(const ScenarioConfig& config) {
  auto v = check_scenario_config(config);
  if (!v.empty()) throw InvariantViolation(std::move(v));
}

namespace {

// Walks one YAML mapping, remembering its dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) throw ParseError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node get(const std::string& key) {
    if (!has(key)) throw ParseError(key_path(key), "missing required key");
    return node_[key];
  }

  template <typename T>
  T value(const std::string& key) {
    auto n = get(key);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ParseError(key_path(key), fmt::format("cannot read '{}'", YAML::Dump(n)));
    }
  }

  template <typename T>
  T value_or(const std::string& key, T fallback) {
    return has(key) ? value<T>(key) : fallback;
  }

  Section child(const std::string& key) { return Section(get(key), key_path(key)); }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      auto key = it->first.as<std::string>();
      if (!seen_.count(key)) throw ParseError(key_path(key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

double read_tau(Section& s, const std::string& key) {
  auto n = s.get(key);
  if (n.IsScalar() && n.Scalar() == "unbounded") return kUnbounded;
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError(s.key_path(key), "expected a number or 'unbounded'");
  }
}

template <typename T, typename Fn>
T parse_enum(Section& s, const std::string& key, T fallback, Fn parse) {
  if (!s.has(key)) return fallback;
  auto text = s.value<std::string>(key);
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(s.key_path(key), e.what());
  }
}

TrafficModel read_traffic(Section t) {
  TrafficModel m;
  m.kind = parse_enum(t, "kind", m.kind, [](const std::string& k) {
    if (k == "bursty-onoff") return TrafficKind::BurstyOnOff;
    if (k == "poisson") return TrafficKind::Poisson;
    throw std::invalid_argument(fmt::format("unknown traffic kind '{}'", k));
  });
  m.mean_rate = t.value<double>("mean_rate");
  m.burst_len = t.value_or("burst_len", m.burst_len);
  m.off_time_ms = t.value_or("off_time_ms", m.off_time_ms);
  m.size_min = t.value_or("size_min", m.size_min);
  m.size_max = t.value_or("size_max", m.size_max);
  m.size_dist = parse_enum(t, "size_dist", m.size_dist, [](const std::string& k) {
    if (k == "uniform") return SizeDistribution::Uniform;
    if (k == "exponential") return SizeDistribution::Exponential;
    throw std::invalid_argument(fmt::format("unknown size distribution '{}'", k));
  });
  t.finish();
  return m;
}

SliceSpec read_slice(Section s) {
  SliceSpec spec;
  spec.id = s.value<int>("id");
  spec.name = s.value_or<std::string>("name", "");
  spec.priority_rank = s.value<int>("priority_rank");
  {
    auto q = s.child("requirement");
    spec.requirement.tau_ms = read_tau(q, "tau_ms");
    spec.requirement.rho = q.value<double>("rho");
    q.finish();
  }
  spec.alpha_tau = s.value<double>("alpha_tau");
  spec.alpha_rho = s.value<double>("alpha_rho");
  spec.demand_mi = s.value<double>("demand_mi");
  spec.traffic = read_traffic(s.child("traffic"));
  s.finish();
  return spec;
}

template <typename Fn>
void for_each_item(Section& parent, const std::string& key, Fn fn) {
  auto seq = parent.get(key);
  if (!seq.IsSequence()) throw ParseError(parent.key_path(key), "expected a list");
  for (std::size_t i = 0; i < seq.size(); ++i) fn(seq[i], fmt::format("{}[{}]", parent.key_path(key), i));
}

std::vector<double> read_doubles(Section& s, const std::string& key) {
  auto n = s.get(key);
  if (!n.IsSequence()) throw ParseError(s.key_path(key), "expected a list of numbers");
  try {
    return n.as<std::vector<double>>();
  } catch (const YAML::Exception&) {
    throw ParseError(s.key_path(key), "expected a list of numbers");
  }
}

void read_osra(Section o, OsraConfig& c) {
  c.eta = o.value_or("eta", c.eta);
  c.schedule = parse_enum(o, "schedule", c.schedule, parse_step_schedule);
  c.delta = o.value_or("delta", c.delta);
  c.probes = o.value_or("probes", c.probes);
  c.epsilon = o.value_or("epsilon", c.epsilon);
  c.max_iters = o.value_or("max_iters", c.max_iters);
  c.transfer_rule = parse_enum(o, "transfer_rule", c.transfer_rule, parse_transfer_rule);
  c.coupling = parse_enum(o, "coupling", c.coupling, parse_gradient_coupling);
  c.analytic_delta = o.value_or("analytic_delta", c.analytic_delta);
  c.common_random_numbers = o.value_or("common_random_numbers", c.common_random_numbers);
  c.threads = o.value_or("threads", c.threads);
  if (o.has("eta_by_slice")) {
    try {
      c.eta_by_slice = o.get("eta_by_slice").as<std::map<SliceId, double>>();
    } catch (const YAML::Exception&) {
      throw ParseError(o.key_path("eta_by_slice"), "expected a mapping of slice id to step size");
    }
  }
  o.finish();
}

}  // namespace

ScenarioConfig parse_scenario_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("line {}", e.mark.line + 1), e.msg);
  }
  ScenarioConfig c;
  Section r(root, "");
  c.new_slice = r.value<int>("new_slice");

  {
    auto t = r.child("topology");
    auto& topo = c.scenario.topology;
    topo.buffer_pkts = t.value_or("buffer_pkts", topo.buffer_pkts);
    for_each_item(t, "edges", [&](const YAML::Node& n, const std::string& path) {
      Section e(n, path);
      topo.edges.push_back({e.value<int>("id"), e.value<double>("capacity_mbps")});
      e.finish();
    });
    for_each_item(t, "cores", [&](const YAML::Node& n, const std::string& path) {
      Section e(n, path);
      topo.cores.push_back({e.value<int>("id"), e.value<double>("mips")});
      e.finish();
    });
    t.finish();
  }

  for_each_item(r, "slices", [&](const YAML::Node& n, const std::string& path) {
    c.scenario.slices.push_back(read_slice(Section(n, path)));
  });

  for_each_item(r, "initial_alloc", [&](const YAML::Node& n, const std::string& path) {
    Section a(n, path);
    SliceId id = a.value<int>("slice");
    auto flows = read_doubles(a, "flows");
    auto cpu = read_doubles(a, "cpu");
    a.finish();
    if (!c.scenario.alloc.rows.emplace(id, AllocationVector(std::move(flows), cpu)).second) {
      throw ParseError(path + ".slice", fmt::format("duplicate allocation for slice {}", id));
    }
  });

  if (r.has("sim")) {
    auto s = r.child("sim");
    c.sim.horizon_s = s.value_or("horizon_s", c.sim.horizon_s);
    c.sim.warmup_s = s.value_or("warmup_s", c.sim.warmup_s);
    c.sim.propagation_ms = s.value_or("propagation_ms", c.sim.propagation_ms);
    s.finish();
  }
  c.statistic = parse_enum(r, "statistic", c.statistic, DelayStatistic::parse);
  c.penalty_exponent = r.value_or("penalty_exponent", c.penalty_exponent);
  if (r.has("osra")) read_osra(r.child("osra"), c.osra);
  if (r.has("baseline")) {
    auto b = r.child("baseline");
    c.baseline.budget_split = b.value_or("budget_split", c.baseline.budget_split);
    c.baseline.margin = b.value_or("margin", c.baseline.margin);
    c.baseline.histogram_bin_ms = b.value_or("histogram_bin_ms", c.baseline.histogram_bin_ms);
    b.finish();
  }
  if (r.has("seeds")) {
    try {
      c.seeds = r.get("seeds").as<std::vector<std::uint64_t>>();
    } catch (const YAML::Exception&) {
      throw ParseError("seeds", "expected a list of nonnegative integers");
    }
  }
  r.finish();
  return c;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_yaml(buf.str());
}

namespace {

std::string traffic_kind_name(TrafficKind k) { return k == TrafficKind::Poisson ? "poisson" : "bursty-onoff"; }
// Shortest text that reads back as the same double.
std::string num(double v) { return fmt::format("{}", v); }

std::vector<std::string> nums(const std::vector<double>& v) {
  std::vector<std::string> out;
  for (double x : v) out.push_back(num(x));
  return out;
}

std::string size_dist_name(SizeDistribution d) {
  return d == SizeDistribution::Uniform ? "uniform" : "exponential";
}

}  // namespace

std::string to_yaml(const ScenarioConfig& c) {
  YAML::Emitter y;
  y << YAML::BeginMap;
  y << YAML::Key << "new_slice" << YAML::Value << c.new_slice;

  const auto& topo = c.scenario.topology;
  y << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "buffer_pkts" << YAML::Value << topo.buffer_pkts;
  y << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : topo.edges) {
    y << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << e.id << YAML::Key << "capacity_mbps"
      << YAML::Value << num(e.capacity_mbps) << YAML::EndMap;
  }
  y << YAML::EndSeq;
  y << YAML::Key << "cores" << YAML::Value << YAML::BeginSeq;
  for (const auto& core : topo.cores) {
    y << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << core.id << YAML::Key << "mips"
      << YAML::Value << num(core.mips) << YAML::EndMap;
  }
  y << YAML::EndSeq << YAML::EndMap;

  y << YAML::Key << "slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.scenario.slices) {
    y << YAML::BeginMap;
    y << YAML::Key << "id" << YAML::Value << s.id;
    y << YAML::Key << "name" << YAML::Value << s.name;
    y << YAML::Key << "priority_rank" << YAML::Value << s.priority_rank;
    y << YAML::Key << "requirement" << YAML::Value << YAML::Flow << YAML::BeginMap;
    y << YAML::Key << "tau_ms" << YAML::Value;
    if (s.requirement.delay_bounded()) {
      y << num(s.requirement.tau_ms);
    } else {
      y << "unbounded";
    }
    y << YAML::Key << "rho" << YAML::Value << num(s.requirement.rho) << YAML::EndMap;
    y << YAML::Key << "alpha_tau" << YAML::Value << num(s.alpha_tau);
    y << YAML::Key << "alpha_rho" << YAML::Value << num(s.alpha_rho);
    y << YAML::Key << "demand_mi" << YAML::Value << num(s.demand_mi);
    const auto& t = s.traffic;
    y << YAML::Key << "traffic" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "kind" << YAML::Value << traffic_kind_name(t.kind);
    y << YAML::Key << "mean_rate" << YAML::Value << num(t.mean_rate);
    y << YAML::Key << "burst_len" << YAML::Value << num(t.burst_len);
    y << YAML::Key << "off_time_ms" << YAML::Value << num(t.off_time_ms);
    y << YAML::Key << "size_min" << YAML::Value << num(t.size_min);
    y << YAML::Key << "size_max" << YAML::Value << num(t.size_max);
    y << YAML::Key << "size_dist" << YAML::Value << size_dist_name(t.size_dist);
    y << YAML::EndMap << YAML::EndMap;
  }
  y << YAML::EndSeq;

  y << YAML::Key << "initial_alloc" << YAML::Value << YAML::BeginSeq;
  for (const auto& [id, row] : c.scenario.alloc.rows) {
    std::vector<double> flows(row.flows().begin(), row.flows().end());
    std::vector<double> cpu(row.cpu().begin(), row.cpu().end());
    y << YAML::BeginMap << YAML::Key << "slice" << YAML::Value << id;
    y << YAML::Key << "flows" << YAML::Value << YAML::Flow << nums(flows);
    y << YAML::Key << "cpu" << YAML::Value << YAML::Flow << nums(cpu) << YAML::EndMap;
  }
  y << YAML::EndSeq;

  y << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "horizon_s" << YAML::Value << num(c.sim.horizon_s);
  y << YAML::Key << "warmup_s" << YAML::Value << num(c.sim.warmup_s);
  y << YAML::Key << "propagation_ms" << YAML::Value << num(c.sim.propagation_ms);
  y << YAML::EndMap;
  y << YAML::Key << "statistic" << YAML::Value << c.statistic.to_string();
  y << YAML::Key << "penalty_exponent" << YAML::Value << c.penalty_exponent;

  const auto& o = c.osra;
  y << YAML::Key << "osra" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "eta" << YAML::Value << num(o.eta);
  if (!o.eta_by_slice.empty()) {
    y << YAML::Key << "eta_by_slice" << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [id, eta] : o.eta_by_slice) y << YAML::Key << id << YAML::Value << num(eta);
    y << YAML::EndMap;
  }
  y << YAML::Key << "schedule" << YAML::Value << to_string(o.schedule);
  y << YAML::Key << "delta" << YAML::Value << num(o.delta);
  y << YAML::Key << "probes" << YAML::Value << o.probes;
  y << YAML::Key << "epsilon" << YAML::Value << num(o.epsilon);
  y << YAML::Key << "max_iters" << YAML::Value << o.max_iters;
  y << YAML::Key << "transfer_rule" << YAML::Value << to_string(o.transfer_rule);
  y << YAML::Key << "coupling" << YAML::Value << to_string(o.coupling);
  y << YAML::Key << "analytic_delta" << YAML::Value << num(o.analytic_delta);
  y << YAML::Key << "common_random_numbers" << YAML::Value << o.common_random_numbers;
  y << YAML::Key << "threads" << YAML::Value << o.threads;
  y << YAML::EndMap;

  y << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "budget_split" << YAML::Value << num(c.baseline.budget_split);
  y << YAML::Key << "margin" << YAML::Value << num(c.baseline.margin);
  y << YAML::Key << "histogram_bin_ms" << YAML::Value << num(c.baseline.histogram_bin_ms);
  y << YAML::EndMap;
  y << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds;
  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

}  // namespace slicelab

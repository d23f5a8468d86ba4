#include "fatiguecz/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace fatiguecz {

namespace {

std::string where(const std::string& source, const YAML::Mark& mark) {
  std::ostringstream os;
  os << source << ":" << (mark.line + 1);
  return os.str();
}

// A mapping node whose keys are checked against the ones actually read.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    return convert<T>(n, key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n)
      throw Error(ErrorCategory::parse,
                  where(source_, node_.Mark()) + ": missing required key '" + key + "' in '" + path_ + "'");
    return convert<T>(n, key);
  }

  std::optional<Section> section(const std::string& key) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return std::nullopt;
    return Section(n, path_.empty() ? key : path_ + "." + key, source_);
  }

  std::vector<Section> list(const std::string& key) {
    used_.insert(key);
    std::vector<Section> out;
    const YAML::Node n = node_[key];
    if (!n) return out;
    if (!n.IsSequence()) fail(n, "'" + key + "' must be a list");
    for (size_t i = 0; i < n.size(); ++i)
      out.emplace_back(n[i], (path_.empty() ? key : path_ + "." + key) + "[" + std::to_string(i) + "]", source_);
    return out;
  }

  template <class T>
  std::vector<T> values(const std::string& key) {
    used_.insert(key);
    std::vector<T> out;
    const YAML::Node n = node_[key];
    if (!n) return out;
    if (!n.IsSequence()) fail(n, "'" + key + "' must be a list");
    for (size_t i = 0; i < n.size(); ++i) out.push_back(convert<T>(n[i], key));
    return out;
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key))
        throw Error(ErrorCategory::parse, where(source_, kv.first.Mark()) + ": unknown key '" + key + "' in '" +
                                              (path_.empty() ? std::string("<root>") : path_) + "'");
    }
  }

  [[noreturn]] void fail_here(const std::string& msg) const { fail(node_, msg); }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    throw Error(ErrorCategory::parse, where(source_, n.Mark()) + ": " + msg);
  }

 private:
  template <class T>
  T convert(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "key '" + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "key '" + key + "' has an invalid value '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

int parse_component(Section& s, const std::string& key) {
  const auto c = s.require<std::string>(key);
  if (c == "x") return 0;
  if (c == "y") return 1;
  s.fail_here("component must be 'x' or 'y', got '" + c + "'");
}

BoundaryCondition parse_bc(Section s) {
  BoundaryCondition bc;
  bc.group = s.require<std::string>("group");
  bc.component = parse_component(s, "component");
  bc.value = s.require<double>("value");
  s.finish();
  return bc;
}

NamedBulkMaterial parse_bulk(Section s) {
  NamedBulkMaterial b;
  b.name = s.require<std::string>("name");
  const auto f = s.get<std::string>("formulation", "plane_stress");
  Formulation form;
  if (f == "plane_stress") form = Formulation::plane_stress;
  else if (f == "plane_strain") form = Formulation::plane_strain;
  else throw Error(ErrorCategory::parse, "formulation must be plane_stress or plane_strain, got '" + f + "'");
  const double t = s.get<double>("thickness", 1.0);
  if (s.has("E")) {
    b.material = BulkMaterial::isotropic(s.require<double>("E"), s.require<double>("nu"), form, t);
  } else {
    auto& m = b.material;
    m.E1 = s.require<double>("E1");
    m.E2 = s.require<double>("E2");
    m.E3 = s.get<double>("E3", m.E2);
    m.G12 = s.require<double>("G12");
    m.nu12 = s.require<double>("nu12");
    m.nu13 = s.get<double>("nu13", m.nu12);
    m.nu23 = s.get<double>("nu23", 0.0);
    m.formulation = form;
    m.thickness = t;
  }
  b.crack_material = s.get<std::string>("crack_material", "");
  s.finish();
  return b;
}

NamedCohesiveMaterial parse_cohesive(Section s) {
  NamedCohesiveMaterial c;
  c.name = s.require<std::string>("name");
  const bool kn = s.has("K_n"), ksh = s.has("K_sh");
  if (kn == ksh) s.fail_here("cohesive material '" + c.name + "' needs exactly one of K_n, K_sh");
  c.shear_stiffness_given = ksh;
  c.stiffness = s.require<double>(ksh ? "K_sh" : "K_n");
  c.f_n = s.require<double>("f_n");
  c.f_sh = s.require<double>("f_sh");
  c.G_Ic = s.require<double>("G_Ic");
  c.G_IIc = s.require<double>("G_IIc");
  c.eta_bk = s.require<double>("eta_bk");
  c.thickness = s.get<double>("thickness", 1.0);
  if (auto f = s.section("fatigue")) {
    auto& fp = c.fatigue;
    fp.eta_brittle = f->require<double>("eta_brittle");
    fp.epsilon = f->require<double>("epsilon");
    fp.gamma = f->get<double>("gamma", 1e7);
    const bool off = f->has("p_offset"), fixed = f->has("p");
    if (off && fixed) f->fail_here("give either p_offset or p, not both");
    fp.p_rule = fixed ? PRule::fixed(f->require<double>("p")) : PRule::coupled(f->get<double>("p_offset", 0.0));
    f->finish();
  }
  s.finish();
  return c;
}

void parse_dcb_geometry(Section s, DcbGeometry& g) {
  g.length = s.get("length", g.length);
  g.h = s.get("h", g.h);
  g.a0 = s.get("a0", g.a0);
  g.layers = s.get("layers", g.layers);
  g.fine_size = s.get("fine_size", g.fine_size);
  g.fine_length = s.get("fine_length", g.fine_length);
  g.coarse_size = s.get("coarse_size", g.coarse_size);
  s.finish();
}

void parse_open_hole_geometry(Section s, OpenHoleGeometry& g) {
  g.length = s.get("length", g.length);
  g.width = s.get("width", g.width);
  g.hole_diameter = s.get("hole_diameter", g.hole_diameter);
  g.n_circ = s.get("n_circ", g.n_circ);
  g.n_radial = s.get("n_radial", g.n_radial);
  g.n_side = s.get("n_side", g.n_side);
  g.angle_lower = s.get("angle_lower", g.angle_lower);
  g.angle_upper = s.get("angle_upper", g.angle_upper);
  s.finish();
}

void parse_mesh_section(Section s, MeshConfig& m) {
  m.generator = s.require<std::string>("generator");
  m.file = s.get<std::string>("file", "");
  m.interface_material = s.get<std::string>("interface_material", "");
  if (auto b = s.section("bar")) {
    m.bar_elements = b->get("elements", m.bar_elements);
    m.bar_length = b->get("length", m.bar_length);
    m.bar_height = b->get("height", m.bar_height);
    m.bar_xfem_element = b->get("xfem_element", m.bar_xfem_element);
    m.bar_fiber_angle = b->get("fiber_angle", m.bar_fiber_angle);
    b->finish();
  }
  if (auto d = s.section("dcb")) parse_dcb_geometry(*d, m.dcb);
  if (auto o = s.section("open_hole")) parse_open_hole_geometry(*o, m.open_hole);
  s.finish();
  static const std::set<std::string> known{"file", "bar", "dcb", "open_hole"};
  if (!known.count(m.generator))
    throw Error(ErrorCategory::parse, "mesh generator must be file, bar, dcb or open_hole, got '" + m.generator + "'");
}

void parse_load(Section s, LoadProgram& p) {
  p.R = s.get("R", p.R);
  p.ramp_steps = s.get("ramp_steps", p.ramp_steps);
  p.ramp_max_cuts = s.get("ramp_max_cuts", p.ramp_max_cuts);
  p.N_max = s.get("N_max", p.N_max);
  p.stiffness_floor = s.get("stiffness_floor", p.stiffness_floor);
  p.stop_at_failure = s.get("stop_at_failure", p.stop_at_failure);
  p.locate_failure = s.get("locate_failure", p.locate_failure);
  p.max_steps = s.get("max_steps", p.max_steps);
  p.insertion = s.get("insertion", p.insertion);
  p.insertion_options.l_c = s.get("l_c", p.insertion_options.l_c);
  p.insertion_options.max_per_step = s.get("max_insertions", p.insertion_options.max_per_step);
  p.measure_group = s.get<std::string>("measure_group", p.measure_group);
  if (s.has("measure_component")) p.measure_component = parse_component(s, "measure_component");
  s.finish();
}

void parse_controller(Section s, CycleStepController& c, LoadProgram& p) {
  c.C = s.get("C", c.C);
  c.xi = s.get("xi", c.xi);
  c.n_iter_opt = s.get("n_iter_opt", c.n_iter_opt);
  c.n_iter_max = s.get("n_iter_max", c.n_iter_max);
  c.c_red = s.get("c_red", c.c_red);
  c.dN_min = s.get("dN_min", c.dN_min);
  c.dN_max = s.get("dN_max", c.dN_max);
  c.dN_init = s.get("dN_init", c.dN_init);
  p.adaptive = s.get("adaptive", p.adaptive);
  const auto policy = s.get<std::string>("fixed_policy", p.fixed_policy == CutPolicy::cut ? "cut" : "stop");
  if (policy == "cut") p.fixed_policy = CutPolicy::cut;
  else if (policy == "stop") p.fixed_policy = CutPolicy::stop;
  else throw Error(ErrorCategory::parse, "fixed_policy must be cut or stop, got '" + policy + "'");
  s.finish();
}

AnalysisConfig parse_root(const YAML::Node& root, const std::string& source) {
  AnalysisConfig cfg;
  cfg.source = source;
  Section s(root, "", source);
  cfg.name = s.get<std::string>("name", cfg.name);
  cfg.theta = s.get("theta", cfg.theta);
  const auto rule = s.get<std::string>("mixity_rule", "linear");
  if (rule == "linear") cfg.mixity = MixityRule::linear;
  else if (rule == "squared") cfg.mixity = MixityRule::squared;
  else throw Error(ErrorCategory::parse, "mixity_rule must be linear or squared, got '" + rule + "'");
  cfg.seed = s.get("seed", cfg.seed);
  auto mesh = s.section("mesh");
  if (!mesh) throw Error(ErrorCategory::parse, source + ": missing required section 'mesh'");
  parse_mesh_section(*mesh, cfg.mesh);
  for (auto& b : s.list("bulk_materials")) cfg.bulk_materials.push_back(parse_bulk(b));
  for (auto& c : s.list("cohesive_materials")) cfg.cohesive_materials.push_back(parse_cohesive(c));
  for (auto& d : s.list("displacements")) cfg.displacements.push_back(parse_bc(d));
  for (auto& f : s.list("forces")) cfg.forces.push_back(parse_bc(f));
  if (auto l = s.section("load")) parse_load(*l, cfg.load);
  if (auto c = s.section("controller")) parse_controller(*c, cfg.controller, cfg.load);
  cfg.load.mixity = cfg.mixity;
  if (auto o = s.section("output")) {
    cfg.output.dir = o->get<std::string>("dir", cfg.output.dir);
    cfg.output.vtk_every = o->get("vtk_every", cfg.output.vtk_every);
    o->finish();
  }
  if (auto d = s.section("dcb")) {
    DcbConfig dc;
    dc.b = d->get("b", dc.b);
    dc.delta_cor = d->get("delta_cor", dc.delta_cor);
    dc.dn_values = d->values<double>("dn_values");
    dc.paris_da = d->get("paris_da", dc.paris_da);
    d->finish();
    cfg.dcb = dc;
  }
  if (auto n = s.section("sn")) {
    SnConfig sc;
    sc.factors = n->values<double>("factors");
    n->finish();
    cfg.sn = sc;
  }
  if (auto t = s.section("tangent_check")) {
    TangentCheckConfig tc;
    tc.samples = t->get("samples", tc.samples);
    tc.tolerance = t->get("tolerance", tc.tolerance);
    t->finish();
    cfg.tangent_check = tc;
  }
  s.finish();
  cfg.validate();
  return cfg;
}

const char* component_name(int c) { return c == 0 ? "x" : "y"; }

}  // namespace

CohesiveMaterial NamedCohesiveMaterial::build(double R) const {
  CohesiveMaterial m;
  m.props = shear_stiffness_given
                ? CohesiveProperties::from_shear_stiffness(stiffness, f_n, f_sh, G_Ic, G_IIc, eta_bk)
                : CohesiveProperties::from_normal_stiffness(stiffness, f_n, f_sh, G_Ic, G_IIc, eta_bk);
  m.fatigue = fatigue;
  m.fatigue.R = R;
  m.thickness = thickness;
  return m;
}

int AnalysisConfig::cohesive_index(const std::string& n) const {
  for (size_t i = 0; i < cohesive_materials.size(); ++i)
    if (cohesive_materials[i].name == n) return static_cast<int>(i);
  throw Error(ErrorCategory::lookup, "undefined cohesive material '" + n + "'");
}

void AnalysisConfig::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw invalid_property("theta must be in [0, 1]");
  if (bulk_materials.empty()) throw invalid_property("at least one bulk material is required");
  for (const auto& b : bulk_materials) {
    b.material.validate();
    if (!b.crack_material.empty()) cohesive_index(b.crack_material);
  }
  for (const auto& c : cohesive_materials) {
    c.build(load.R).props.validate();
    c.fatigue.validate();
  }
  if (!mesh.interface_material.empty()) cohesive_index(mesh.interface_material);
  if (mesh.generator == "file" && mesh.file.empty()) throw invalid_property("mesh generator 'file' needs 'file'");
  load.validate();
  controller.validate();
}

AnalysisConfig parse_config_string(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCategory::parse, where(source, e.mark) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorCategory::parse, source + ": configuration must be a mapping");
  return parse_root(root, source);
}

AnalysisConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

std::string serialize_config(const AnalysisConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "theta" << YAML::Value << c.theta;
  e << YAML::Key << "mixity_rule" << YAML::Value << (c.mixity == MixityRule::linear ? "linear" : "squared");
  e << YAML::Key << "seed" << YAML::Value << c.seed;

  const auto& m = c.mesh;
  e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "generator" << YAML::Value << m.generator;
  if (!m.file.empty()) e << YAML::Key << "file" << YAML::Value << m.file;
  if (!m.interface_material.empty()) e << YAML::Key << "interface_material" << YAML::Value << m.interface_material;
  if (m.generator == "bar") {
    e << YAML::Key << "bar" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "elements" << YAML::Value << m.bar_elements;
    e << YAML::Key << "length" << YAML::Value << m.bar_length;
    e << YAML::Key << "height" << YAML::Value << m.bar_height;
    e << YAML::Key << "xfem_element" << YAML::Value << m.bar_xfem_element;
    e << YAML::Key << "fiber_angle" << YAML::Value << m.bar_fiber_angle;
    e << YAML::EndMap;
  } else if (m.generator == "dcb") {
    const auto& g = m.dcb;
    e << YAML::Key << "dcb" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "length" << YAML::Value << g.length;
    e << YAML::Key << "h" << YAML::Value << g.h;
    e << YAML::Key << "a0" << YAML::Value << g.a0;
    e << YAML::Key << "layers" << YAML::Value << g.layers;
    e << YAML::Key << "fine_size" << YAML::Value << g.fine_size;
    e << YAML::Key << "fine_length" << YAML::Value << g.fine_length;
    e << YAML::Key << "coarse_size" << YAML::Value << g.coarse_size;
    e << YAML::EndMap;
  } else if (m.generator == "open_hole") {
    const auto& g = m.open_hole;
    e << YAML::Key << "open_hole" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "length" << YAML::Value << g.length;
    e << YAML::Key << "width" << YAML::Value << g.width;
    e << YAML::Key << "hole_diameter" << YAML::Value << g.hole_diameter;
    e << YAML::Key << "n_circ" << YAML::Value << g.n_circ;
    e << YAML::Key << "n_radial" << YAML::Value << g.n_radial;
    e << YAML::Key << "n_side" << YAML::Value << g.n_side;
    e << YAML::Key << "angle_lower" << YAML::Value << g.angle_lower;
    e << YAML::Key << "angle_upper" << YAML::Value << g.angle_upper;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "bulk_materials" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : c.bulk_materials) {
    const auto& bm = b.material;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << b.name;
    e << YAML::Key << "E1" << YAML::Value << bm.E1;
    e << YAML::Key << "E2" << YAML::Value << bm.E2;
    e << YAML::Key << "E3" << YAML::Value << bm.E3;
    e << YAML::Key << "G12" << YAML::Value << bm.G12;
    e << YAML::Key << "nu12" << YAML::Value << bm.nu12;
    e << YAML::Key << "nu13" << YAML::Value << bm.nu13;
    e << YAML::Key << "nu23" << YAML::Value << bm.nu23;
    e << YAML::Key << "formulation" << YAML::Value
      << (bm.formulation == Formulation::plane_stress ? "plane_stress" : "plane_strain");
    e << YAML::Key << "thickness" << YAML::Value << bm.thickness;
    if (!b.crack_material.empty()) e << YAML::Key << "crack_material" << YAML::Value << b.crack_material;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "cohesive_materials" << YAML::Value << YAML::BeginSeq;
  for (const auto& m2 : c.cohesive_materials) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << m2.name;
    e << YAML::Key << (m2.shear_stiffness_given ? "K_sh" : "K_n") << YAML::Value << m2.stiffness;
    e << YAML::Key << "f_n" << YAML::Value << m2.f_n;
    e << YAML::Key << "f_sh" << YAML::Value << m2.f_sh;
    e << YAML::Key << "G_Ic" << YAML::Value << m2.G_Ic;
    e << YAML::Key << "G_IIc" << YAML::Value << m2.G_IIc;
    e << YAML::Key << "eta_bk" << YAML::Value << m2.eta_bk;
    e << YAML::Key << "thickness" << YAML::Value << m2.thickness;
    const auto& f = m2.fatigue;
    e << YAML::Key << "fatigue" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "eta_brittle" << YAML::Value << f.eta_brittle;
    e << YAML::Key << "epsilon" << YAML::Value << f.epsilon;
    e << YAML::Key << "gamma" << YAML::Value << f.gamma;
    if (f.p_rule.kind == PRule::Kind::fixed) e << YAML::Key << "p" << YAML::Value << f.p_rule.value;
    else e << YAML::Key << "p_offset" << YAML::Value << f.p_rule.value;
    e << YAML::EndMap;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  auto bcs = [&](const char* key, const std::vector<BoundaryCondition>& v) {
    e << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    for (const auto& bc : v) {
      e << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "group" << YAML::Value << bc.group;
      e << YAML::Key << "component" << YAML::Value << component_name(bc.component);
      e << YAML::Key << "value" << YAML::Value << bc.value;
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  };
  bcs("displacements", c.displacements);
  bcs("forces", c.forces);

  const auto& l = c.load;
  e << YAML::Key << "load" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "R" << YAML::Value << l.R;
  e << YAML::Key << "ramp_steps" << YAML::Value << l.ramp_steps;
  e << YAML::Key << "ramp_max_cuts" << YAML::Value << l.ramp_max_cuts;
  e << YAML::Key << "N_max" << YAML::Value << l.N_max;
  e << YAML::Key << "stiffness_floor" << YAML::Value << l.stiffness_floor;
  e << YAML::Key << "stop_at_failure" << YAML::Value << l.stop_at_failure;
  e << YAML::Key << "locate_failure" << YAML::Value << l.locate_failure;
  e << YAML::Key << "max_steps" << YAML::Value << l.max_steps;
  e << YAML::Key << "insertion" << YAML::Value << l.insertion;
  e << YAML::Key << "l_c" << YAML::Value << l.insertion_options.l_c;
  e << YAML::Key << "max_insertions" << YAML::Value << l.insertion_options.max_per_step;
  if (!l.measure_group.empty()) {
    e << YAML::Key << "measure_group" << YAML::Value << l.measure_group;
    e << YAML::Key << "measure_component" << YAML::Value << component_name(l.measure_component);
  }
  e << YAML::EndMap;

  const auto& k = c.controller;
  e << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "C" << YAML::Value << k.C;
  e << YAML::Key << "xi" << YAML::Value << k.xi;
  e << YAML::Key << "n_iter_opt" << YAML::Value << k.n_iter_opt;
  e << YAML::Key << "n_iter_max" << YAML::Value << k.n_iter_max;
  e << YAML::Key << "c_red" << YAML::Value << k.c_red;
  e << YAML::Key << "dN_min" << YAML::Value << k.dN_min;
  e << YAML::Key << "dN_max" << YAML::Value << k.dN_max;
  e << YAML::Key << "dN_init" << YAML::Value << k.dN_init;
  e << YAML::Key << "adaptive" << YAML::Value << l.adaptive;
  e << YAML::Key << "fixed_policy" << YAML::Value << (l.fixed_policy == CutPolicy::cut ? "cut" : "stop");
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << c.output.dir;
  e << YAML::Key << "vtk_every" << YAML::Value << c.output.vtk_every;
  e << YAML::EndMap;

  if (c.dcb) {
    e << YAML::Key << "dcb" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "b" << YAML::Value << c.dcb->b;
    e << YAML::Key << "delta_cor" << YAML::Value << c.dcb->delta_cor;
    e << YAML::Key << "dn_values" << YAML::Value << YAML::Flow << c.dcb->dn_values;
    e << YAML::Key << "paris_da" << YAML::Value << c.dcb->paris_da;
    e << YAML::EndMap;
  }
  if (c.sn) {
    e << YAML::Key << "sn" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "factors" << YAML::Value << YAML::Flow << c.sn->factors;
    e << YAML::EndMap;
  }
  if (c.tangent_check) {
    e << YAML::Key << "tangent_check" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "samples" << YAML::Value << c.tangent_check->samples;
    e << YAML::Key << "tolerance" << YAML::Value << c.tangent_check->tolerance;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Mesh build_mesh(const AnalysisConfig& cfg) {
  const auto& m = cfg.mesh;
  Mesh mesh;
  if (m.generator == "file") {
    std::filesystem::path p(m.file);
    if (p.is_relative() && !cfg.source.empty() && cfg.source != "<string>")
      p = std::filesystem::path(cfg.source).parent_path() / p;
    mesh = read_mesh(p.string());
  } else if (m.generator == "bar") {
    mesh = make_bar_mesh(m.bar_elements, m.bar_length, m.bar_height, m.bar_xfem_element, m.bar_fiber_angle);
  } else if (m.generator == "dcb") {
    mesh = make_dcb_mesh(m.dcb);
  } else {
    mesh = make_open_hole_mesh(m.open_hole);
  }
  if (!m.interface_material.empty()) {
    const int idx = cfg.cohesive_index(m.interface_material);
    for (auto& ie : mesh.interfaces) ie.material = idx;
    for (auto& s : mesh.surfaces) s.material = idx;
  }
  return mesh;
}

Model build_model(const AnalysisConfig& cfg, double load_scale) {
  Model model;
  model.mesh = build_mesh(cfg);
  for (const auto& b : cfg.bulk_materials) {
    BulkMaterial bm = b.material;
    bm.crack_material = b.crack_material.empty() ? -1 : cfg.cohesive_index(b.crack_material);
    model.bulk_materials.push_back(bm);
  }
  for (const auto& c : cfg.cohesive_materials) model.cohesive_materials.push_back(c.build(cfg.load.R));
  model.theta = cfg.theta;
  model.initialize();
  for (const auto& d : cfg.displacements) model.prescribe(d.group, d.component, d.value);
  for (const auto& f : cfg.forces) model.apply_force(f.group, f.component, load_scale * f.value);
  return model;
}

}  // namespace fatiguecz

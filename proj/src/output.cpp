#include "fatiguecz/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fatiguecz/xfem.hpp"
#include "shape.hpp"

namespace fatiguecz {

std::string format_csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::ofstream open_file(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, "cannot write '" + path + "'");
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(open_file(path)), columns_(header.size()), path_(path) {
  for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << quote(header[i]);
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<CsvValue>& values) {
  if (values.size() != columns_) throw Error(ErrorCategory::io, "CSV row width mismatch in '" + path_ + "'");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ",";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) out_ << format_csv_double(v);
          else if constexpr (std::is_same_v<T, long long>) out_ << v;
          else out_ << quote(v);
        },
        values[i]);
  }
  out_ << "\r\n";
  out_.flush();
  if (!out_) throw Error(ErrorCategory::io, "write failed for '" + path_ + "'");
}

void write_steps_csv(const std::string& path, const std::vector<StepRecord>& history) {
  CsvWriter w(path, {"step", "phase", "N", "dN", "n_iter", "cuts", "load_factor", "force", "displacement",
                     "stiffness", "dissipated_energy", "cracks", "inserted", "damaged_length", "damaged_area",
                     "max_damage", "crack_damage", "insertion_residual"});
  for (const auto& s : history)
    w.row({static_cast<long long>(s.step), std::string(s.ramp ? "ramp" : "cyclic"), s.N, s.dN,
           static_cast<long long>(s.iterations), static_cast<long long>(s.cuts), s.load_factor, s.force,
           s.displacement, s.stiffness, s.energy, static_cast<long long>(s.cracks),
           static_cast<long long>(s.inserted), s.damaged_length, s.damaged_area, s.max_damage, s.crack_damage,
           s.insertion_residual});
}

void write_sn_csv(const std::string& path, const std::vector<SnRow>& rows) {
  CsvWriter w(path, {"factor", "N_fail_sim", "N_fail_analytical", "rel_error", "censored", "steps"});
  for (const auto& r : rows)
    w.row({r.factor, r.N_sim, r.N_analytical, r.rel_error, static_cast<long long>(r.censored),
           static_cast<long long>(r.steps)});
}

void write_crack_history_csv(const std::string& path, const std::vector<CrackHistoryRecord>& history) {
  CsvWriter w(path, {"N", "a", "G_Imax", "dadN", "F_max", "propagating"});
  for (const auto& r : history)
    w.row({r.N, r.a, r.G_Imax, r.dadN, r.F_max, static_cast<long long>(r.propagating)});
}

void write_paris_csv(const std::string& path, const ParisData& d) {
  CsvWriter w(path, {"log10_G_ratio", "log10_dadN"});
  for (size_t i = 0; i < d.x.size(); ++i) w.row({d.x[i], d.y[i]});
}

void write_vtk(const std::string& path, const Model& m, const std::string& title) {
  std::vector<Vec2> pts(m.mesh.nodes.begin(), m.mesh.nodes.end());
  std::vector<Eigen::Vector2d> disp;
  for (size_t i = 0; i < m.mesh.nodes.size(); ++i) disp.push_back(m.u.segment<2>(2 * i));
  struct Cell {
    int vtk_type;
    std::vector<int> nodes;
    int kind;
    double damage;
    double measure;
  };
  std::vector<Cell> cells;
  auto add_point = [&](const Vec2& x, const Eigen::Vector2d& u) {
    pts.push_back(x);
    disp.push_back(u);
    return static_cast<int>(pts.size() - 1);
  };

  for (size_t e = 0; e < m.mesh.elements.size(); ++e) {
    const auto& el = m.mesh.elements[e];
    const int ci = m.element_crack[e];
    if (ci < 0) {
      cells.push_back({el.type == BulkType::tri3 ? 5 : 9,
                       std::vector<int>(el.nodes.begin(), el.nodes.begin() + el.num_nodes()), 0, 0.0,
                       m.mesh.element_area(static_cast<int>(e))});
      continue;
    }
    const auto& cr = m.cracks[ci];
    for (int side = 0; side < 2; ++side) {
      const auto& tris = side == 0 ? cr.tris_a : cr.tris_b;
      std::vector<Vec2> poly{tris[0][0], tris[0][1]};
      for (const auto& t : tris) poly.push_back(t[2]);
      Cell c{7, {}, 0, 0.0, 0.0};
      std::vector<Vec2> phys;
      for (const auto& xi : poly) {
        const auto sh = detail::shape(el.type, xi);
        Vec2 x = Vec2::Zero();
        for (int i = 0; i < el.num_nodes(); ++i) x += sh.N[i] * m.mesh.nodes[el.nodes[i]];
        phys.push_back(x);
        c.nodes.push_back(add_point(x, cracked_displacement(m, ci, xi, side == 0)));
      }
      for (size_t i = 0; i < phys.size(); ++i) {
        const Vec2& a = phys[i];
        const Vec2& b = phys[(i + 1) % phys.size()];
        c.measure += 0.5 * (a.x() * b.y() - b.x() * a.y());
      }
      c.measure = std::abs(c.measure);
      cells.push_back(std::move(c));
    }
    const int p0 = add_point(cr.x0, 0.5 * (cracked_displacement(m, ci, cr.xi0, true) +
                                           cracked_displacement(m, ci, cr.xi0, false)));
    const int p1 = add_point(cr.x1, 0.5 * (cracked_displacement(m, ci, cr.xi1, true) +
                                           cracked_displacement(m, ci, cr.xi1, false)));
    const double D = 0.5 * (m.points[cr.points[0]].state.D + m.points[cr.points[1]].state.D);
    cells.push_back({3, {p0, p1}, 2, D, (cr.x1 - cr.x0).norm()});
  }
  for (size_t e = 0; e < m.mesh.interfaces.size(); ++e) {
    const auto& ie = m.mesh.interfaces[e];
    double w = 0.0, wD = 0.0;
    for (int pid : m.interface_points[e]) {
      w += m.points[pid].weight;
      wD += m.points[pid].weight * m.points[pid].state.D;
    }
    const double t = m.cohesive_materials[ie.material].thickness;
    cells.push_back({3, {ie.nodes[0], ie.nodes[1]}, 1, w > 0.0 ? wD / w : 0.0, w / t});
  }
  for (size_t e = 0; e < m.mesh.surfaces.size(); ++e) {
    const auto& s = m.mesh.surfaces[e];
    double w = 0.0, wD = 0.0;
    for (int pid : m.surface_points[e]) {
      w += m.points[pid].weight;
      wD += m.points[pid].weight * m.points[pid].state.D;
    }
    cells.push_back({5, {s.nodes[0], s.nodes[1], s.nodes[2]}, 3, w > 0.0 ? wD / w : 0.0, w});
  }

  auto out = open_file(path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return std::string(buf);
  };
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << pts.size() << " double\n";
  for (const auto& p : pts) out << num(p.x()) << " " << num(p.y()) << " 0\n";
  size_t size = 0;
  for (const auto& c : cells) size += c.nodes.size() + 1;
  out << "CELLS " << cells.size() << " " << size << "\n";
  for (const auto& c : cells) {
    out << c.nodes.size();
    for (int n : c.nodes) out << " " << n;
    out << "\n";
  }
  out << "CELL_TYPES " << cells.size() << "\n";
  for (const auto& c : cells) out << c.vtk_type << "\n";
  out << "CELL_DATA " << cells.size() << "\n";
  out << "SCALARS kind int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out << c.kind << "\n";
  out << "SCALARS damage double 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out << num(c.damage) << "\n";
  out << "SCALARS measure double 1\nLOOKUP_TABLE default\n";
  for (const auto& c : cells) out << num(c.measure) << "\n";
  out << "POINT_DATA " << pts.size() << "\n";
  out << "VECTORS displacement double\n";
  for (const auto& u : disp) out << num(u.x()) << " " << num(u.y()) << " 0\n";
  if (!out) throw Error(ErrorCategory::io, "write failed for '" + path + "'");
}

}  // namespace fatiguecz

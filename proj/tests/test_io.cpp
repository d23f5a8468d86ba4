#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fatiguecz/analysis.hpp"
#include "fatiguecz/config.hpp"
#include "fatiguecz/output.hpp"

using namespace fatiguecz;
namespace fs = std::filesystem;

namespace {

std::string config_path(const char* name) { return std::string(FATIGUECZ_CONFIG_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const char* name) {
  auto p = fs::temp_directory_path() / "fatiguecz_tests" / name;
  fs::remove_all(p);
  return p;
}

template <class F>
std::string error_message(F&& f, ErrorCategory expected) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), expected);
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return {};
}

}  // namespace

TEST(Config, ExampleARoundTripIsAFixpoint) {
  const auto cfg = parse_config(config_path("example_a.cfg"));
  const std::string once = serialize_config(cfg);
  const std::string twice = serialize_config(parse_config_string(once));
  EXPECT_EQ(once, twice);
  ASSERT_TRUE(cfg.sn.has_value());
  EXPECT_EQ(cfg.sn->factors, (std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9}));
}

TEST(Config, DcbValues) {
  const auto cfg = parse_config(config_path("dcb.cfg"));
  EXPECT_EQ(cfg.mesh.generator, "dcb");
  EXPECT_DOUBLE_EQ(cfg.mesh.dcb.a0, 51.2);
  EXPECT_DOUBLE_EQ(cfg.mesh.dcb.fine_size, 0.2);
  EXPECT_EQ(cfg.mesh.dcb.layers, 4);
  const auto& c = cfg.cohesive_materials.at(cfg.cohesive_index("interface"));
  EXPECT_DOUBLE_EQ(c.G_Ic, 0.305);
  EXPECT_DOUBLE_EQ(c.f_n, 30.0);
  EXPECT_DOUBLE_EQ(cfg.load.R, 0.1);
  ASSERT_TRUE(cfg.dcb.has_value());
  EXPECT_DOUBLE_EQ(cfg.dcb->delta_cor, 6.2);
}

TEST(Config, UnknownKeyReportsLine) {
  std::string text = slurp(config_path("example_a.cfg"));
  text.replace(text.find("theta: 0.5"), 10, "theta: 0.5\nthetta: 0.4");
  const auto msg = error_message([&] { parse_config_string(text, "x.cfg"); }, ErrorCategory::parse);
  EXPECT_NE(msg.find("thetta"), std::string::npos) << msg;
  EXPECT_NE(msg.find(":5"), std::string::npos) << msg;
}

TEST(Config, MissingStrengthIsNamed) {
  std::string text = slurp(config_path("example_a.cfg"));
  text.erase(text.find("    f_n: 10.0\n"), 14);
  const auto msg = error_message([&] { parse_config_string(text); }, ErrorCategory::parse);
  EXPECT_NE(msg.find("f_n"), std::string::npos) << msg;
}

TEST(Csv, HeaderAndNineSignificantDigits) {
  const auto dir = scratch("csv");
  const auto path = (dir / "a.csv").string();
  {
    CsvWriter w(path, {"x", "name", "k"});
    w.row({1.0 / 3.0, std::string("a,b"), 7LL});
    EXPECT_THROW(w.row({1.0}), Error);
  }
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "x,name,k\r");
  const double x = std::stod(row.substr(0, row.find(',')));
  EXPECT_NEAR(x, 1.0 / 3.0, 1e-10);
  EXPECT_NE(row.find("\"a,b\""), std::string::npos);
  EXPECT_EQ(format_csv_double(123456789.0), "1.2345678900e+08");
}

TEST(Vtk, InterfaceDamageIntegralMatchesDamagedLength) {
  auto cfg = parse_config(config_path("dcb.cfg"));
  Model m = build_model(cfg);
  for (size_t i = 0; i < m.points.size(); ++i) m.points[i].state.D = 0.5 + 0.5 * std::sin(0.37 * i);
  const double expected = crack_length(m, 0.0);
  ASSERT_GT(expected, 1.0);

  const auto path = (scratch("vtk") / "f.vtk").string();
  write_vtk(path, m, "test");
  std::ifstream in(path);
  std::string tok;
  size_t ncell = 0;
  std::vector<int> kind;
  std::vector<double> damage, measure;
  while (in >> tok) {
    if (tok == "CELL_DATA") in >> ncell;
    if (tok != "SCALARS") continue;
    std::string name, type, lt, def;
    int comps;
    in >> name >> type >> comps >> lt >> def;
    for (size_t i = 0; i < ncell; ++i) {
      double v;
      in >> v;
      if (name == "kind") kind.push_back(static_cast<int>(v));
      if (name == "damage") damage.push_back(v);
      if (name == "measure") measure.push_back(v);
    }
  }
  ASSERT_EQ(kind.size(), ncell);
  ASSERT_EQ(damage.size(), ncell);
  ASSERT_EQ(measure.size(), ncell);
  double integral = 0.0;
  for (size_t i = 0; i < ncell; ++i)
    if (kind[i] == 1) integral += damage[i] * measure[i];
  EXPECT_NEAR(integral, expected, 1e-9 * expected);
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "urnent/io.hpp"

namespace fs = std::filesystem;
using urnent::io::Table;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("urnent_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Format, DoublesRoundTripAtSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, 0.048822514091880137912, 1e-300, 12345.678}) {
    const std::string s = urnent::io::format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(urnent::io::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(urnent::io::format_double(std::nan("")), "nan");
}

TEST(Csv, HeaderRowsAndQuoting) {
  Table t;
  t.columns = {"ell", "value", "flag", "note"};
  t.add_row({std::int64_t{3}, 0.5, true, std::string("a,b")});
  t.add_row({std::int64_t{4}, urnent::io::Cell{}, false, std::string("say \"hi\"")});
  EXPECT_EQ(urnent::io::to_csv(t), "ell,value,flag,note\n3,0.5,true,\"a,b\"\n4,,false,\"say \"\"hi\"\"\"\n");
  EXPECT_THROW(t.add_row({std::int64_t{1}}), urnent::domain_error);
  EXPECT_EQ(t.column("flag"), 2u);
  EXPECT_THROW(t.column("missing"), urnent::domain_error);
}

TEST(Json, ObjectsInColumnOrderWithNulls) {
  Table t;
  t.columns = {"z", "a"};
  t.add_row({std::int64_t{1}, urnent::io::Cell{}});
  t.add_row({std::int64_t{2}, std::numeric_limits<double>::infinity()});
  const auto j = nlohmann::ordered_json::parse(urnent::io::to_json(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0].begin().key(), "z");
  EXPECT_TRUE(j[0]["a"].is_null());
  EXPECT_EQ(j[1]["a"], "inf");
}

TEST(WriteAtomic, ReplacesWholeFileAndLeavesNoTemporary) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path out = dir / "table.csv";
  urnent::io::write_atomic(out, "first\n");
  urnent::io::write_atomic(out, "second\n");
  EXPECT_EQ(slurp(out), "second\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(urnent::io::write_atomic(dir / "no_such_dir" / "x.csv", "x"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(MixingModel, ParsesCommentsAndRenormalizes) {
  std::istringstream in(
      "# two-colour model\n"
      "4 2\n"
      "\n"
      "0 4 0.25\n"
      "2 2 0.5000000001\n"
      "4 0 0.25\n");
  const auto mu = urnent::io::parse_mixing_model(in);
  EXPECT_EQ(mu.n(), 4);
  EXPECT_EQ(mu.c(), 2u);
  EXPECT_EQ(mu.weights().size(), 3u);
  double total = 0.0;
  for (const auto& [ell, w] : mu.weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(MixingModel, RejectsMalformedInput) {
  const char* bad[] = {
      "",                          // no header
      "4\n0 4 1\n",                // short header
      "4 2\n0 4\n",                // missing weight
      "4 2\n1 2 1.0\n",            // wrong total
      "4 2\n0 4 0.5\n",            // weights far from 1
      "4 2\n0 4 0.5\n0 4 0.5\n",   // duplicate atom
      "4 2\n0 4 -1\n4 0 2\n",      // negative weight
      "4 2\n0 4 1 extra\n",        // trailing text
      "4 2\n",                     // no atoms
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(urnent::io::parse_mixing_model(in), urnent::domain_error) << "input: " << text;
  }
}

TEST(MixingModel, ErrorNamesTheLine) {
  std::istringstream in("4 2\n0 4 0.5\n1 2 0.5\n");
  try {
    urnent::io::parse_mixing_model(in);
    FAIL() << "expected a parse error";
  } catch (const urnent::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Svg, StylesPerSeries) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<urnent::io::Series> series{
      {"exact", {0.1, 0.2, std::nan("")}, urnent::io::SeriesStyle::circles},
      {"uniform", {0.3, 0.3, 0.3}, urnent::io::SeriesStyle::solid},
      {"new", {0.2, 0.25, 0.3}, urnent::io::SeriesStyle::dashed},
      {"other", {0.2, 0.22, 0.3}, urnent::io::SeriesStyle::dotted}};
  const std::string svg = urnent::io::svg_plot("t", "l", x, series);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("stroke-dasharray=\"6,4\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"2,3\""), std::string::npos);
  std::size_t circles = 0;
  for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  EXPECT_EQ(circles, 3u);  // two finite points plus the legend marker
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metashock/io.hpp"

using namespace metashock;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("metashock_io_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(FormatNumber, RoundTrips) {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::strtod(io::format_number(v).c_str(), nullptr), v);
  EXPECT_EQ(io::format_number(100), "100");
  EXPECT_EQ(io::format_label(0.005), "0.005");
  EXPECT_EQ(io::format_label(1e5), "100000");
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(io::hex64(io::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex64(io::fnv1a("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(io::hex64(io::fnv1a("foobar")), "85944171f73967e8");
}

TEST(Table, CsvLayout) {
  io::Table t({"x", "u"});
  t.add({0.5, -0.25});
  t.add({1, 2});
  EXPECT_EQ(t.csv(), "x,u\n0.5,-0.25\n1,2\n");
  EXPECT_THROW(t.add({1.0}), Error);
}

TEST(SnapshotTable, WideColumnsPerTime) {
  const Grid g(2, 1.0);
  const auto t = io::snapshot_table({GridField(g, {1, 0, -1}, 0.0), GridField(g, {1, 0.5, -1}, 10.0)});
  EXPECT_EQ(t.csv(), "x,t=0,t=10\n-1,1,1\n0,0,0.5\n1,-1,-1\n");
  EXPECT_THROW(io::snapshot_table({}), Error);
}

TEST(OutputDir, ManifestIndexesEveryFileWithChecksum) {
  const auto dir = fresh_dir("manifest");
  {
    io::OutputDir out(dir, "steady");
    io::Table t({"a"});
    t.add({1});
    out.write_csv("sub/b.csv", t);
    out.write_text("a.txt", "hello");
    out.meta()["scheme"] = "test";
    out.finish();
  }
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["command"], "steady");
  EXPECT_EQ(m["scheme"], "test");
  ASSERT_EQ(m["files"].size(), 2u);
  EXPECT_EQ(m["files"][0]["path"], "a.txt");
  EXPECT_EQ(m["files"][0]["fnv1a64"], io::hex64(io::fnv1a("hello")));
  EXPECT_EQ(m["files"][1]["path"], "sub/b.csv");
  EXPECT_EQ(m["files"][1]["bytes"], slurp(dir / "sub/b.csv").size());
  // Every regular file besides the manifest is listed.
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") ++files;
  EXPECT_EQ(files, m["files"].size());
  fs::remove_all(dir);
}

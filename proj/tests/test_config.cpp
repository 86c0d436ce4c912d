#include "metalr/config.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace metalr;

namespace {

// Reference FNV-1a 64, checked against its published test vectors below.
std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST(Config, DefaultsForEmptyText) {
  const Config c = Config::parse("");
  EXPECT_EQ(c.get_index("k"), 16);
  EXPECT_EQ(c.get_index("d"), 128);
  EXPECT_EQ(c.raw("preset"), "orthonormal");
  EXPECT_EQ(c.get_index("n_l1"), 65536);
  EXPECT_EQ(c.get_index("t_h"), 80);
  EXPECT_EQ(c.get_index("L"), 0);
  EXPECT_EQ(c.raw("linkage"), "average");
  EXPECT_DOUBLE_EQ(c.get_double("confidence"), 0.9);
  EXPECT_EQ(c.get_double_list("gamma2_grid"), (std::vector<double>{0.0, 0.1, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(c.get_double("em_tol"), 1e-7);
}

TEST(Config, ParsesSectionsCommentsAndLists) {
  const Config c = Config::parse(
      "# experiment\n"
      "[meta]\n"
      "  k = 4   ; four components\n"
      "d=32\n"
      "\n"
      "[pool]\n"
      "t_l1 = 2, 4 ,8\n"
      "[bench]\n"
      "gamma2_grid = 0.25\n");
  EXPECT_EQ(c.get_index("k"), 4);
  EXPECT_EQ(c.get_index("d"), 32);
  EXPECT_EQ(c.get_index_list("t_l1"), (std::vector<Index>{2, 4, 8}));
  EXPECT_THROW(c.get_index("t_l1"), ConfigError);
  EXPECT_EQ(c.get_double_list("gamma2_grid"), (std::vector<double>{0.25}));
}

TEST(Config, RejectsMalformedInput) {
  const char* bad[] = {
      "[nope]\nk = 1\n",           // unknown section
      "[meta]\nkk = 1\n",          // unknown key
      "k = 1\n",                   // outside a section
      "[pool]\nk = 1\n",           // wrong section
      "[meta]\nk = 1\nk = 2\n",    // duplicate
      "[meta]\nk =\n",             // empty value
      "[meta]\nk 1\n",             // no '='
      "[meta\nk = 1\n",            // bad header
  };
  for (const char* text : bad) EXPECT_THROW(Config::parse(text), ConfigError) << text;
}

TEST(Config, TypedAccessorsValidate) {
  Config c;
  c.set("k", "3.5");
  EXPECT_THROW(c.get_index("k"), ConfigError);
  c.set("sigma", "abc");
  EXPECT_THROW(c.get_double("sigma"), ConfigError);
  c.set("sigma", "0.5x");
  EXPECT_THROW(c.get_double("sigma"), ConfigError);
  EXPECT_THROW(c.set("missing", "1"), ConfigError);
  EXPECT_THROW(c.raw("missing"), ConfigError);
  c.set("gamma2_grid", " , ");
  EXPECT_THROW(c.get_double_list("gamma2_grid"), ConfigError);
}

TEST(Config, HashIsFnv1aOfCanonicalText) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
  Config c;
  EXPECT_EQ(c.hash(), fnv1a_hex(c.canonical()));
  c.set("k", "8");
  EXPECT_EQ(c.hash(), fnv1a_hex(c.canonical()));
  EXPECT_EQ(c.hash().size(), 16u);
}

TEST(Config, CanonicalFormIgnoresLayout) {
  const Config a = Config::parse("[pool]\nn_h = 100\n[meta]\nk = 4\n");
  const Config b = Config::parse("# comment\n[meta]\n   k=4   \n\n[pool]\nn_h=100 ; x\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), Config().hash());
  // Explicitly writing a default value gives the same configuration.
  EXPECT_EQ(Config::parse("[meta]\nk = 16\n").hash(), Config().hash());
}

TEST(Config, CanonicalTextRoundTrips) {
  Config c;
  c.set("t_l1", "2,4,8");
  c.set("preset", "random_unit");
  const Config again = Config::parse(c.canonical());
  EXPECT_EQ(again.canonical(), c.canonical());
  for (const auto& [key, section] : Config::section_of()) {
    EXPECT_NE(c.canonical().find("\n" + key + " = "), std::string::npos) << key;
    (void)section;
  }
}

TEST(Config, LoadReadsFile) {
  const std::string path = ::testing::TempDir() + "/metalr_config_test.ini";
  {
    std::ofstream out(path);
    out << "[pipeline]\ntau = 5\n";
  }
  EXPECT_EQ(Config::load(path).get_index("tau"), 5);
  std::remove(path.c_str());
  EXPECT_THROW(Config::load(path), ConfigError);
}

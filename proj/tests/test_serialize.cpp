#include "oracles/suites.hpp"
#include "quantrep/serialize.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

using namespace quantrep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name, const std::string& sub = "") {
    auto dir = fs::temp_directory_path() / "quantrep_serialize_test" / sub;
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

QuantileModel small_model() {
    auto ds = suite::separable_1d(0, 60);
    return fit_quantile_model(ds, fit_base_classifiers(ds, {}), QuantileGrid::make(10, 50));
}

}  // namespace

TEST(ModelFile, RoundTripIsExact) {
    auto m = small_model();
    auto p = scratch("m.json");
    save_model(m, p);
    EXPECT_EQ(load_model(p), m);
}

TEST(ModelFile, RoundTripWithoutLinearBase) {
    auto ds = gen_latent_binary(suite::latent_spec(), 200, {}, 0);
    auto m = suite::oracle_model(ds);
    auto p = scratch("oracle.json");
    save_model(m, p);
    EXPECT_EQ(load_model(p), m);
}

TEST(ModelFile, SavesAreByteIdentical) {
    auto a = scratch("m.json", "a");
    auto b = scratch("m.json", "b");
    save_model(small_model(), a);
    save_model(small_model(), b);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(fs::path(a).replace_extension(".bin")), slurp(fs::path(b).replace_extension(".bin")));
}

TEST(ModelFile, TruncatedSidecarIsRejected) {
    auto p = scratch("t.json");
    save_model(small_model(), p);
    auto bin = fs::path(p).replace_extension(".bin");
    fs::resize_file(bin, fs::file_size(bin) - 8);
    EXPECT_THROW(load_model(p), ValidationError);
}

TEST(ModelFile, WrongSchemaIsRejected) {
    auto p = scratch("s.json");
    save_model(small_model(), p);
    auto j = nlohmann::json::parse(slurp(p));
    j["schema"] = "something/9";
    std::ofstream(p) << j.dump();
    EXPECT_THROW(load_model(p), ValidationError);
}

TEST(ModelFile, MissingFileIsRejected) { EXPECT_THROW(load_model(scratch("absent.json")), ValidationError); }

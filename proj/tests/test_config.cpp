#include "geodl/config.hpp"

#include <doctest.h>

using namespace geodl;

TEST_CASE("empty text gives the defaults") {
    const ExperimentConfig c = parse_config("");
    const ExperimentConfig d;
    CHECK(format_config(c) == format_config(d));
    CHECK(c.stream.classes_total == 20);
    CHECK(c.training.distill.beta == 6.0);
    CHECK(c.run_count() == 40);
}

TEST_CASE("single key overrides only itself") {
    const ExperimentConfig c = parse_config("beta = 6.0\n");
    CHECK(c.training.distill.beta == 6.0);
    const ExperimentConfig e = parse_config("  beta=2.5   # weaker\n");
    CHECK(e.training.distill.beta == 2.5);
    CHECK(e.training.distill.tau == 2.0);
    CHECK(e.training.lr == 0.05);
}

TEST_CASE("modes and seeds form a cross product") {
    const ExperimentConfig c = parse_config("mode = geodl,cosine,none\nseeds = 1,2,3\n");
    CHECK(c.run_count() == 9);
    CHECK(c.modes == std::vector<DistillMode>{DistillMode::GeoDL, DistillMode::Cosine, DistillMode::None});
}

TEST_CASE("errors carry line numbers and are all reported") {
    try {
        parse_config("beta = 1\n\nbogus = 3\nlr = fast\nbeta = 2\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.problems().size() == 3);
        CHECK(e.problems()[0] == "line 3: unknown key \"bogus\"");
        CHECK(e.problems()[1].rfind("line 4: lr:", 0) == 0);
        CHECK(e.problems()[2] == "line 5: duplicate key \"beta\"");
    }
}

TEST_CASE("invariant violations") {
    CHECK_THROWS_AS(parse_config("classes_total = 21\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("subspace_n = 8\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = geodl,geodl\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = fancy\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seeds = 1,1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("tau = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("noise_sigma = nan\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("beta 3\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/geodl.cfg"), ConfigError);
}

TEST_CASE("format_config round-trips") {
    ExperimentConfig c;
    c.training.lr = 0.1 + 0.2;
    c.stream.noise_sigma = 1.0 / 3.0;
    c.modes = {DistillMode::LwF};
    c.seeds = {4, 99};
    c.master_seed = 123456789012345ULL;
    c.training.pca_center = false;
    const ExperimentConfig back = parse_config(format_config(c));
    CHECK(format_config(back) == format_config(c));
    CHECK(back.training.lr == c.training.lr);
    CHECK(back.hash() == c.hash());
}

TEST_CASE("hash ignores output location and scheduling") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.output_path = "elsewhere";
    b.jobs = 3;
    CHECK(a.hash() == b.hash());
    b.training.distill.beta = 5.0;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("run seeds depend on master seed") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.master_seed = 1;
    CHECK(a.run_seed(3) == a.run_seed(3));
    CHECK(a.run_seed(3) != a.run_seed(4));
    CHECK(a.run_seed(3) != b.run_seed(3));
}

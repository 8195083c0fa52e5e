#include "cli_runner.hpp"
#include "doctest.h"
#include "pdn/binary_io.hpp"
#include "tempdir.hpp"

namespace {

const char* const kTiny =
    "--set geometry.layers=2 --set data.values=3 --set grid.count=20 --set grid.step_hz=100 "
    "--set train.hidden_widths=8 --set train.mixtures=3 --set train.batch_size=4 --set design.pca_samples=100 "
    "--set design.pca_resolution=16";

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    TempDir dir;
    CHECK(run_cli("", dir.path()).status == 2);
    CHECK(run_cli("frobnicate", dir.path()).status == 2);
    CHECK(run_cli("gen-data --values 4 --random 10 --out " + q(dir / "d.pdnd"), dir.path()).status == 2);
    const CliResult unknown = run_cli("show-config --set train.epoch=3", dir.path());
    CHECK(unknown.status == 2);
    CHECK(unknown.err.find("train.epoch") != std::string::npos);
    CHECK(run_cli("--help", dir.path()).status == 0);
}

TEST_CASE("show-config reflects precedence") {
    TempDir dir;
    pdn::io::write_text(dir / "c.conf", "train.epochs = 7\ntrain.seed = 3\n");
    const CliResult r = run_cli("show-config --config " + q(dir / "c.conf") + " --set train.seed=4", dir.path());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("train.epochs = 7\n") != std::string::npos);
    CHECK(r.out.find("train.seed = 4\n") != std::string::npos);
    CHECK(r.out.find("train.batch_size = 256\n") != std::string::npos);
}

TEST_CASE("pipeline through the executable") {
    TempDir dir;
    const std::string tiny = kTiny;
    CliResult r = run_cli("gen-data " + tiny + " --out " + q(dir / "d.pdnd"), dir.path());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("pairs 9") != std::string::npos);

    r = run_cli("train " + tiny + " --data " + q(dir / "d.pdnd") + " --epochs 2 --out " + q(dir / "m.pdnw"), dir.path());
    REQUIRE(r.status == 0);

    pdn::io::write_text(dir / "bad.csv", "frequency_hz,transmittance\n20,0.5\n40,oops\n");
    r = run_cli("design " + tiny + " --weights " + q(dir / "m.pdnw") + " --target " + q(dir / "bad.csv") + " --out " +
                    q(dir / "x.csv"),
                dir.path());
    CHECK(r.status == 2);
    CHECK(r.err.find("line 3") != std::string::npos);

    r = run_cli("design " + tiny + " --weights " + q(dir / "missing.pdnw") + " --target peak:500 --out " +
                    q(dir / "x.csv"),
                dir.path());
    CHECK(r.status == 4);

    pdn::io::write_text(dir / "junk.pdnw", "PDNDxxxx");
    r = run_cli("design " + tiny + " --weights " + q(dir / "junk.pdnw") + " --target peak:500 --out " +
                    q(dir / "x.csv"),
                dir.path());
    CHECK(r.status == 4);
    CHECK(r.err.find("offset") != std::string::npos);

    r = run_cli("design " + tiny + " --weights " + q(dir / "m.pdnw") + " --target structure:14.5,5 --out " +
                    q(dir / "designs.csv"),
                dir.path());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("A1 density") != std::string::npos);
    r = run_cli("verify " + tiny + " --set geometry.layers=3 --designs " + q(dir / "designs.csv") +
                    " --target peak:500 --out " + q(dir / "v.csv"),
                dir.path());
    CHECK(r.status == 6);

    r = run_cli("train " + tiny + " --set train.pair_limit=1 --data " + q(dir / "d.pdnd") + " --out " +
                    q(dir / "m.pdnw"),
                dir.path());
    CHECK(r.status == 2);
    r = run_cli("gen-data " + tiny + " --set data.pair_limit=5 --out " + q(dir / "big.pdnd"), dir.path());
    CHECK(r.status == 3);
    r = run_cli("train " + tiny + " --model ann --lr 1e200 --epochs 50 --data " + q(dir / "d.pdnd") + " --out " +
                    q(dir / "wild.pdnw"),
                dir.path());
    CHECK(r.status == 5);
}

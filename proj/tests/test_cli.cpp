#include "facademap/dataset.hpp"
#include "facademap/facade_fit.hpp"
#include "facademap/text_format.hpp"
#include "facademap/texturing.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using facademap::testing::read_bytes;
using facademap::testing::scratch_dir;
using facademap::testing::write_text;

namespace {

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + FACADEMAP_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  const auto bytes = read_bytes(p);
  return {bytes.begin(), bytes.end()};
}

std::map<std::string, std::vector<unsigned char>> tree(const fs::path& root) {
  std::map<std::string, std::vector<unsigned char>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_bytes(e.path());
  }
  return out;
}

/// Simulated street once per test binary, at a reduced camera resolution.
const fs::path& simulated() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "facademap_tests" / ("cli_sim_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    std::string scene = slurp(FACADEMAP_SCENES "/street_tree.txt");
    for (std::size_t at; (at = scene.find("width = 960")) != std::string::npos;) scene.replace(at, 11, "width = 480");
    for (std::size_t at; (at = scene.find("height = 540")) != std::string::npos;) scene.replace(at, 12, "height = 270");
    write_text(d / "scene.txt", scene);
    const int rc = cli("simulate --scene \"" + (d / "scene.txt").string() + "\" --seed 3 --out \"" + (d / "sim").string() + "\"",
                       d / "sim.log");
    if (rc != 0) throw std::runtime_error("simulate failed: " + slurp(d / "sim.log"));
    return d / "sim";
  }();
  return dir;
}

}  // namespace

TEST(Cli, EndToEndOnBundledScene) {
  const auto out = scratch_dir();
  ASSERT_EQ(cli("run-pipeline --dataset \"" + (simulated() / "dataset").string() + "\" --out \"" + (out / "run").string() + "\"",
                out / "run.log"),
            0)
      << slurp(out / "run.log");
  const auto manifest = slurp(out / "run" / "manifest.txt");
  EXPECT_NE(manifest.find("status = ok"), std::string::npos);
  EXPECT_NE(manifest.find("count_clusters = 1\n"), std::string::npos);
  EXPECT_NE(manifest.find("count_quads = 1\n"), std::string::npos);

  const auto quads = facademap::load_quads(out / "run" / "quads.txt");
  ASSERT_EQ(quads.size(), 1u);
  EXPECT_EQ(quads[0].segment_id, 1);

  bool nonempty_mask = false;
  for (const auto& e : fs::directory_iterator(out / "run" / "masks")) {
    const auto name = e.path().filename().string();
    if (name.find("_soft") != std::string::npos) continue;
    nonempty_mask |= !facademap::read_mask(e.path()).empty_mask();
  }
  EXPECT_TRUE(nonempty_mask);
  const auto facade = out / "run" / "facades" / "seg_1";
  const auto ortho = facademap::read_image(facade / "ortho.ppm");
  const auto holes = facademap::read_mask(facade / "holes.pgm");
  EXPECT_EQ(ortho.width, holes.width);
  EXPECT_EQ(ortho.height, holes.height);
  EXPECT_TRUE(fs::exists(facade / "sidecar.txt"));
  EXPECT_TRUE(fs::exists(facade / "occluders.txt"));

  // Evaluate against the simulator truth.
  ASSERT_EQ(cli("evaluate --run \"" + (out / "run").string() + "\" --truth \"" + (simulated() / "truth").string() + "\"",
                out / "eval.log"),
            0)
      << slurp(out / "eval.log");
  const auto metrics = slurp(out / "run" / "metrics.txt");
  EXPECT_EQ(metrics, slurp(out / "eval.log"));
  EXPECT_NE(metrics.find("average deviation"), std::string::npos);
}

TEST(Cli, RerunIsByteIdentical) {
  const auto out = scratch_dir();
  const std::string data = "--dataset \"" + (simulated() / "dataset").string() + "\"";
  ASSERT_EQ(cli("run-pipeline " + data + " --threads 1 --out \"" + (out / "a").string() + "\"", out / "a.log"), 0);
  ASSERT_EQ(cli("run-pipeline " + data + " --threads 3 --out \"" + (out / "b").string() + "\"", out / "b.log"), 0);
  EXPECT_TRUE(tree(out / "a") == tree(out / "b"));
  // Rerunning into a used directory replaces the previous outputs.
  ASSERT_EQ(cli("run-pipeline " + data + " --out \"" + (out / "a").string() + "\"", out / "c.log"), 0);
  EXPECT_TRUE(tree(out / "a") == tree(out / "b"));
}

TEST(Cli, SimulateIsDeterministic) {
  const auto out = scratch_dir();
  const std::string scene = "--scene \"" + (simulated().parent_path() / "scene.txt").string() + "\" --seed 3";
  ASSERT_EQ(cli("simulate " + scene + " --out \"" + (out / "s").string() + "\"", out / "s.log"), 0);
  EXPECT_TRUE(tree(out / "s") == tree(simulated()));
}

TEST(Cli, EmptyCadastreFailsAtExtract) {
  const auto out = scratch_dir();
  write_text(out / "empty_cadastre.txt", "# nothing\n");
  const auto d = simulated() / "dataset";
  const int rc = cli("run-pipeline --points \"" + (d / "points.txt").string() + "\" --frames \"" +
                         (d / "frames.txt").string() + "\" --cadastre \"" + (out / "empty_cadastre.txt").string() +
                         "\" --cameras \"" + (d / "cameras.txt").string() + "\" --out \"" + (out / "run").string() + "\"",
                     out / "run.log");
  EXPECT_NE(rc, 0);
  EXPECT_NE(slurp(out / "run.log").find("extract"), std::string::npos) << slurp(out / "run.log");
  const auto manifest = slurp(out / "run" / "manifest.txt");
  EXPECT_NE(manifest.find("status = failed"), std::string::npos);
  EXPECT_NE(manifest.find("failed_stage = extract"), std::string::npos);
}

TEST(Cli, MissingInputsAndBadScenes) {
  const auto out = scratch_dir();
  EXPECT_EQ(cli("run-pipeline --points x.txt --out \"" + (out / "r").string() + "\"", out / "a.log"), 2);
  EXPECT_NE(cli("run-pipeline --dataset \"" + (out / "nowhere").string() + "\" --out \"" + (out / "r").string() + "\"",
                out / "b.log"),
            0);
  write_text(out / "no_facades.txt", "[trajectory]\nstart = 0 0\ndirection = 1 0\nframes = 5\n");
  EXPECT_EQ(cli("simulate --scene \"" + (out / "no_facades.txt").string() + "\" --out \"" + (out / "s").string() + "\"",
                out / "c.log"),
            1);
  EXPECT_NE(slurp(out / "c.log").find("facade"), std::string::npos);
  EXPECT_NE(cli("frobnicate", out / "d.log"), 0);
}

TEST(Cli, ConfigFileIsAppliedAndRecorded) {
  const auto out = scratch_dir();
  write_text(out / "cfg.txt", "ortho_gsd = 0.1\ncube_dilation_enabled = true\n");
  ASSERT_EQ(cli("run-pipeline --dataset \"" + (simulated() / "dataset").string() + "\" --config \"" +
                    (out / "cfg.txt").string() + "\" --out \"" + (out / "run").string() + "\"",
                out / "run.log"),
            0)
      << slurp(out / "run.log");
  const auto cfg = slurp(out / "run" / "config.txt");
  EXPECT_NE(cfg.find("ortho_gsd = 0.1\n"), std::string::npos);
  const auto grid = facademap::load_ortho_sidecar(out / "run" / "facades" / "seg_1" / "sidecar.txt");
  EXPECT_DOUBLE_EQ(grid.gsd, 0.1);
  const auto manifest = slurp(out / "run" / "manifest.txt");
  EXPECT_EQ(manifest.find("occluders_synthetic = 0\n"), std::string::npos);

  write_text(out / "bad.txt", "no_such_key = 3\n");
  EXPECT_NE(cli("run-pipeline --dataset \"" + (simulated() / "dataset").string() + "\" --config \"" +
                    (out / "bad.txt").string() + "\" --out \"" + (out / "run2").string() + "\"",
                out / "bad.log"),
            0);
}

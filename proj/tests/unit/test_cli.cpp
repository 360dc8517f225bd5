#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "mnardre/csv_io.hpp"
#include "mnardre/missingness_learning.hpp"
#include "mnardre/serialization.hpp"

namespace fs = std::filesystem;
using namespace mnardre;

namespace {

const fs::path kFixtures = MNARDRE_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (kFixtures / name).string(); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mnardre_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

KeyValues kv_of(const std::string& text) {
  std::istringstream in(text);
  return read_key_values(in);
}

}  // namespace

TEST_CASE("msd experiment output is byte-identical across runs") {
  const std::vector<std::string> args{"experiment", "msd", "--scenario", "gauss5d", "--n", "100",
                                      "--reps", "5", "--seed", "7", "--out", "-"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("# config_hash=", 0) == 0);
  CHECK(a.out.find("seed=7") != std::string::npos);
  auto c = args;
  c[9] = "8";
  CHECK(run(c).out != a.out);
}

TEST_CASE("np-calibrate reproduces the hand-worked threshold") {
  const auto r = run({"np-calibrate", "--model", fixture("np_model.kv"), "--calibration", fixture("np_calib.csv"),
                      "--phi0", "halfspace(0.5,-1,-1)", "--alpha", "0.4", "--margin",
                      "0.1", "--out", "-"});
  REQUIRE(r.code == 0);
  const auto kv = kv_of(r.out);
  CHECK(kv.at("threshold") == "2.5");
  CHECK(kv.at("method") == "missing_weighted");
  CHECK(kv.at("non_paper") == "1");

  const auto deg = run({"np-calibrate", "--model", fixture("np_model.kv"), "--calibration", fixture("np_calib.csv"),
                        "--phi0", "halfspace(0.5,-1,-1)", "--alpha", "0.1", "--delta", "0.05", "--out", "-"});
  REQUIRE(deg.code == 0);
  CHECK(kv_of(deg.out).at("degenerate") == "1");
  CHECK(deg.err.find("warning") != std::string::npos);
  const auto quiet = run({"--quiet", "np-calibrate", "--model", fixture("np_model.kv"), "--calibration",
                          fixture("np_calib.csv"), "--phi0", "halfspace(0.5,-1,-1)", "--alpha", "0.1", "--delta",
                          "0.05", "--out", "-"});
  CHECK(quiet.err.empty());
}

TEST_CASE("binomial calibration refuses missing data") {
  const auto r = run({"np-calibrate", "--model", fixture("np_model.kv"), "--calibration", fixture("np_calib.csv"),
                      "--method", "binomial", "--out", "-"});
  CHECK(r.code == cli::kDataError);
}

TEST_CASE("classify applies the stored threshold") {
  const auto clf = scratch("clf.kv");
  REQUIRE(run({"np-calibrate", "--model", fixture("np_model.kv"), "--calibration", fixture("np_calib.csv"), "--phi0",
               "halfspace(0.5,-1,-1)", "--alpha", "0.4", "--margin", "0.1", "--out",
               clf.string()})
              .code == 0);
  const auto r = run({"classify", "--classifier", clf.string(), "--data", fixture("points.csv"), "--out", "-"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto table = read_csv(in, CsvOptions{"NA", true, "label", false});
  REQUIRE(table.features.back() == "prediction");
  std::vector<double> got;
  for (const auto& p : table.points) got.push_back(*p[2]);
  CHECK(got == std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("calibration split is recorded") {
  const auto model = scratch("model.kv");
  REQUIRE(run({"fit", "--data", fixture("train.csv"), "--phi1", "coords:logistic(-1,1,-1);zero", "--out",
               model.string()})
              .code == 0);
  const auto idx = scratch("rows.txt");
  const auto r = run({"np-calibrate", "--model", model.string(), "--data", fixture("train.csv"), "--split", "0.5",
                      "--seed", "3", "--split-out", idx.string(), "--out", "-"});
  REQUIRE(r.code == 0);
  const auto rows = kv_of(r.out).at("calibration_rows");
  std::istringstream a(rows), b(slurp(idx));
  std::vector<int> va, vb;
  for (int x; a >> x;) va.push_back(x);
  for (int x; b >> x;) vb.push_back(x);
  CHECK(va == vb);
  CHECK(va.size() == 30);
  for (int x : va) CHECK(x % 2 == 0);  // even rows are class 0
  CHECK(run({"np-calibrate", "--model", model.string(), "--data", fixture("train.csv"), "--out", "-"}).code ==
        cli::kUsage);
}

TEST_CASE("learn-phi matches the library") {
  const auto r = run({"learn-phi", "--data", fixture("train.csv"), "--latent", fixture("train.csv"), "--out", "-"});
  // the latent file carries the same missing marks, which is a data error
  CHECK(r.code == cli::kDataError);

  const auto table = read_csv(kFixtures / "train.csv");
  LabeledData latent = table;
  for (auto& p : latent.points) {
    auto c = p.coords();
    if (!c[0]) c[0] = 3.0;
    p = ObservedPoint(c);
  }
  const auto lat_path = scratch("latent.csv");
  write_csv(lat_path, latent);
  const auto ok = run({"learn-phi", "--data", fixture("train.csv"), "--latent", lat_path.string(), "--queries", "5",
                       "--seed", "4", "--out", "-"});
  REQUIRE(ok.code == 0);

  std::vector<ObservedPoint> pts;
  Eigen::MatrixXd lat(60, 2);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.labels[i] != 1) continue;
    pts.push_back(table.points[i]);
    lat(k, 0) = *latent.points[i][0];
    lat(k, 1) = *latent.points[i][1];
    ++k;
  }
  const auto lib = learn_missingness(Dataset(pts, 1), lat, QueryBudgetPlan{{5}}, 4);
  CHECK(kv_of(ok.out).at("phi") == format_missingness(lib.phi));
}

TEST_CASE("exit codes") {
  CHECK(run({"fit", "--data", fixture("bad_label.csv")}).code == cli::kDataError);
  CHECK(run({"fit", "--data", fixture("train.csv"), "--phi1", "const(2)"}).code == cli::kUsage);
  CHECK(run({"fit"}).code == cli::kUsage);
  CHECK(run({"bogus"}).code == cli::kUsage);
  CHECK(run({"fit", "--data", fixture("does_not_exist.csv")}).code == cli::kDataError);
  CHECK(run({"--strict", "fit", "--data", fixture("train.csv"), "--max-iters", "1", "--out", "-"}).code ==
        cli::kNumericError);
  CHECK(run({"--strict", "experiment", "msd", "--n", "100", "--reps", "2", "--max-iters", "1", "--out", "-"}).code ==
        cli::kNumericError);
}

TEST_CASE("config file supplies defaults and flags override") {
  const auto from_file = run({"--config", fixture("msd.ini"), "experiment", "msd", "--out", "-"});
  REQUIRE(from_file.code == 0);
  const auto explicit_args =
      run({"experiment", "msd", "--scenario", "gauss5d", "--n", "100", "--reps", "3", "--seed", "11", "--out", "-"});
  CHECK(from_file.out == explicit_args.out);
  const auto overridden = run({"--config", fixture("msd.ini"), "experiment", "msd", "--seed", "12", "--out", "-"});
  CHECK(overridden.out.find("seed=12") != std::string::npos);
}

TEST_CASE("corrupt and preprocess replay") {
  const auto a = run({"corrupt", "--data", fixture("train.csv"), "--phi", "coords:const(0.3);zero", "--class", "0",
                      "--seed", "5", "--out", "-"});
  const auto b = run({"corrupt", "--data", fixture("train.csv"), "--phi", "coords:const(0.3);zero", "--class", "0",
                      "--seed", "5", "--out", "-"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const auto rec = scratch("rec.kv");
  const auto fitted = run({"preprocess", "--data", fixture("train.csv"), "--impute", "--normalize", "--record-out",
                           rec.string(), "--out", "-"});
  REQUIRE(fitted.code == 0);
  const auto replay =
      run({"preprocess", "--data", fixture("train.csv"), "--record-in", rec.string(), "--out", "-"});
  REQUIRE(replay.code == 0);
  std::istringstream x(fitted.out), y(replay.out);
  CHECK(read_csv(x).points == read_csv(y).points);
}

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "cli/manifest.hpp"
#include "cli/sha256.hpp"
#include "prominence/csv.hpp"
#include "prominence/image.hpp"
#include "prominence/rng.hpp"
#include "prominence/vbow.hpp"
#include "prominence/video.hpp"
#include "support/fixtures.hpp"
#include "support/pipeline_fixtures.hpp"

using namespace prominence;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

// Every file under out_dir must be declared in manifest.json with its real
// digest (the manifest does not list itself).
void check_manifest_covers(const std::string& out_dir, const std::string& command) {
    const nlohmann::json doc = nlohmann::json::parse(slurp(out_dir + "/manifest.json"));
    std::map<std::string, std::string> declared;
    for (const nlohmann::json& entry : doc.at("files")) {
        CHECK(entry.at("command").get<std::string>() == command);
        declared[entry.at("path").get<std::string>()] =
            entry.at("sha256").get<std::string>();
    }
    std::map<std::string, std::string> actual = tree_hashes(out_dir);
    actual.erase("manifest.json");
    // logs written by run_cli never live inside out_dir, so exact equality
    CHECK(declared == actual);
}

}  // namespace

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(cli::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(cli::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // one block boundary case: 56 bytes forces the length into a second block
    CHECK(cli::sha256_hex(std::string(56, 'a')) ==
          cli::sha256_hex(std::string(56, 'a')));

    testsupport::TempDir dir("sha_file");
    spit(dir.file("payload.bin"), "abc");
    CHECK(cli::sha256_file(dir.file("payload.bin")) == cli::sha256_hex("abc"));
}

TEST_CASE("config files parse strictly and validate ranges") {
    testsupport::TempDir dir("config");
    SUBCASE("values land in the right fields") {
        spit(dir.file("ok.json"),
             R"({"seed": 42, "jobs": 3, "out_dir": "somewhere",
                 "vbow": {"k": 5, "round_counts": true},
                 "wordfish": {"orient": ["left", "right"]}})");
        cli::PipelineConfig config = cli::load_config(dir.file("ok.json"));
        CHECK(config.seed == 42);
        CHECK(config.jobs == 3);
        CHECK(config.out_dir == "somewhere");
        CHECK(config.vbow.k == 5);
        CHECK(config.vbow.round_counts);
        CHECK(config.wordfish.orient_first == "left");
        CHECK(config.wordfish.orient_second == "right");
        CHECK(config.salience_method == "mbd");  // untouched defaults survive
        CHECK(config.video.tau == 30.0);
    }
    SUBCASE("unknown keys are rejected at both levels") {
        spit(dir.file("top.json"), R"({"vbowx": {}})");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("top.json")),
                             doctest::Contains("unknown key 'vbowx'"),
                             std::invalid_argument);
        spit(dir.file("nested.json"), R"({"vbow": {"kk": 1}})");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("nested.json")),
                             doctest::Contains("vbow.kk"), std::invalid_argument);
    }
    SUBCASE("out-of-range values are named") {
        spit(dir.file("k.json"), R"({"vbow": {"k": 1}})");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("k.json")),
                             doctest::Contains("k must be"), std::invalid_argument);
        spit(dir.file("method.json"), R"({"salience": {"method": "deep"}})");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("method.json")),
                             doctest::Contains("salience.method"),
                             std::invalid_argument);
    }
    SUBCASE("orientation needs a pair") {
        spit(dir.file("orient.json"), R"({"wordfish": {"orient": ["only"]}})");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("orient.json")),
                             doctest::Contains("two document ids"),
                             std::invalid_argument);
    }
    SUBCASE("malformed JSON is reported with the path") {
        spit(dir.file("bad.json"), "{ nope");
        CHECK_THROWS_WITH_AS(cli::load_config(dir.file("bad.json")),
                             doctest::Contains("not valid JSON"),
                             std::invalid_argument);
    }
}

TEST_CASE("manifests list every emitted file with its digest") {
    testsupport::TempDir dir("manifest");
    fs::create_directories(dir.path() / "sub");
    spit(dir.file("b.txt"), "beta\n");
    spit(dir.file("sub/a.txt"), "alpha\n");

    cli::Manifest manifest(dir.path().string(), "salience");
    manifest.add(dir.file("sub/a.txt"));
    manifest.add(dir.file("b.txt"));
    manifest.write();

    const nlohmann::json doc = nlohmann::json::parse(slurp(dir.file("manifest.json")));
    CHECK(doc.at("version") == "manifest/1");
    REQUIRE(doc.at("files").size() == 2);
    CHECK(doc.at("files")[0].at("path") == "b.txt");  // sorted, relative
    CHECK(doc.at("files")[0].at("sha256") == cli::sha256_hex("beta\n"));
    CHECK(doc.at("files")[0].at("command") == "salience");
    CHECK(doc.at("files")[1].at("path") == "sub/a.txt");
    CHECK(doc.at("files")[1].at("sha256") == cli::sha256_hex("alpha\n"));
}

TEST_CASE("salience command writes maps, scores and a complete manifest") {
    testsupport::TempDir dir("cmd_salience");
    fs::create_directories(dir.path() / "images");
    fs::create_directories(dir.path() / "ann");
    save_image(RasterImage::make(32, 32, 1, 90), dir.file("images/flat.png"));
    RasterImage square = RasterImage::make(64, 64, 1, 25);
    paint_block(square, 24, 24, 16, 16, 230);
    save_image(square, dir.file("images/square.png"));
    save_image(RasterImage::make(16, 16, 1, 10), dir.file("images/full.png"));
    spit(dir.file("ann/full.json"),
         R"({"image": "full.png", "regions": [
             {"x": 0, "y": 0, "w": 16, "h": 16, "label": "whole"}]})");
    nlohmann::json config = {{"image_root", (dir.path() / "images").string()},
                             {"annotation_root", (dir.path() / "ann").string()},
                             {"salience", {{"method", "mbd"}}}};
    spit(dir.file("config.json"), config.dump());

    const std::string out = dir.file("out");
    const int rc = run_cli(PROMINENCE_CLI_PATH, "salience --config \"" + dir.file("config.json") +
                               "\" --out \"" + out + "\"",
                           dir.path().string());
    CHECK(rc == 0);

    RasterImage flat_map = load_image(out + "/maps/flat.png");
    CHECK(flat_map.width == 32);
    bool all_black = true;
    for (std::uint8_t v : flat_map.data) all_black = all_black && v == 0;
    CHECK(all_black);  // a constant image has no salient region

    RasterImage square_map = load_image(out + "/maps/square.png");
    CHECK(square_map.at(32, 32, 0) > square_map.at(2, 2, 0));

    const std::string scores = slurp(out + "/region_scores.csv");
    CHECK(scores.find("image,region,size_fraction,centeredness,"
                      "salience_aggregate,prominence\n") == 0);
    CHECK(scores.find("full,whole,1,") != std::string::npos);

    check_manifest_covers(out, "salience");
}

TEST_CASE("salience keeps going past broken images and signals partial failure") {
    testsupport::TempDir dir("cmd_salience_partial");
    fs::create_directories(dir.path() / "images");
    save_image(RasterImage::make(24, 24, 1, 50), dir.file("images/good.png"));
    spit(dir.file("images/broken.png"), "this is not a png");
    nlohmann::json config = {{"image_root", (dir.path() / "images").string()}};
    spit(dir.file("config.json"), config.dump());

    const std::string out = dir.file("out");
    const int rc = run_cli(PROMINENCE_CLI_PATH, "salience --config \"" + dir.file("config.json") +
                               "\" --out \"" + out + "\"",
                           dir.path().string());
    CHECK(rc == 2);
    CHECK(fs::is_regular_file(out + "/maps/good.png"));
    CHECK_FALSE(fs::exists(out + "/maps/broken.png"));
    CHECK(slurp(dir.file("stderr.txt")).find("broken.png") != std::string::npos);
    check_manifest_covers(out, "salience");
}

TEST_CASE("scale emits all four scenarios and is byte-identical across runs") {
    testsupport::TempDir dir("cmd_scale");
    const std::string config = make_scale_fixture(dir);
    const std::string log = dir.path().string();

    const std::string out1 = dir.file("out1");
    const std::string out2 = dir.file("out2");
    const std::string out3 = dir.file("out3");
    const int rc1 = run_cli(PROMINENCE_CLI_PATH, "scale --config \"" + config + "\" --jobs 1 --out \"" + out1 + "\"", log);
    if (rc1 != 0) FAIL("scale failed; stderr: ", slurp(dir.file("stderr.txt")));
    CHECK(run_cli(PROMINENCE_CLI_PATH, "scale --config \"" + config + "\" --jobs 1 --out \"" + out2 + "\"", log) == 0);
    CHECK(run_cli(PROMINENCE_CLI_PATH, "scale --config \"" + config + "\" --jobs 8 --out \"" + out3 + "\"", log) == 0);

    const std::map<std::string, std::string> h1 = tree_hashes(out1);
    CHECK(h1 == tree_hashes(out2));
    CHECK(h1 == tree_hashes(out3));

    for (const char* scenario : {"default_vbow", "weighted_clustering",
                                 "weighted_counts", "salience_vbow"}) {
        const std::string base = out1 + "/scale/" + scenario;
        for (const char* name :
             {"vocabulary.json", "dtm.csv", "wordfish.json", "idealpoints.csv"}) {
            const std::string artifact = base + "/" + name;
            CHECK_MESSAGE(fs::is_regular_file(artifact), artifact);
        }
        // orientation pins outlet_a to the negative side
        CsvTable points = read_csv_file(base + "/idealpoints.csv");
        REQUIRE(points.rows.size() == 2);
        REQUIRE(points.rows[0][0] == "outlet_a");
        REQUIRE(points.rows[1][0] == "outlet_b");
        const double omega_a = parse_double(points.rows[0][1]);
        const double omega_b = parse_double(points.rows[1][1]);
        CHECK(omega_a < omega_b);
        // two documents under mean-0 / sd-1 can only sit at -1 and +1
        CHECK(omega_a == doctest::Approx(-1.0));
        CHECK(omega_b == doctest::Approx(1.0));
    }
    check_manifest_covers(out1, "scale");
}

TEST_CASE("scale ingests an existing document-term matrix directly") {
    testsupport::TempDir dir("cmd_scale_dtm");
    std::vector<DocumentRow> rows;
    const double counts[4][6] = {{30, 28, 25, 2, 1, 3},
                                 {28, 30, 27, 1, 2, 2},
                                 {2, 1, 3, 30, 26, 29},
                                 {1, 3, 2, 28, 30, 27}};
    for (int i = 0; i < 4; ++i) {
        DocumentRow row;
        row.id = "doc" + std::to_string(i);
        row.meta = {{"outlet", i < 2 ? "left" : "right"}};
        row.terms.assign(counts[i], counts[i] + 6);
        rows.push_back(std::move(row));
    }
    write_dtm_csv(build_dtm(std::move(rows)), dir.file("corpus.csv"));

    const std::string out = dir.file("out");
    const int rc = run_cli(PROMINENCE_CLI_PATH, "scale --dtm \"" + dir.file("corpus.csv") +
                               "\" --out \"" + out + "\"",
                           dir.path().string());
    CHECK(rc == 0);
    CHECK(fs::is_regular_file(out + "/scale/from_dtm/dtm.csv"));
    CHECK(fs::is_regular_file(out + "/scale/from_dtm/wordfish.json"));
    CsvTable points = read_csv_file(out + "/scale/from_dtm/idealpoints.csv");
    REQUIRE(points.rows.size() == 4);
    // the two planted blocks end up on opposite sides
    const double d0 = parse_double(points.rows[0][1]);
    const double d1 = parse_double(points.rows[1][1]);
    const double d2 = parse_double(points.rows[2][1]);
    const double d3 = parse_double(points.rows[3][1]);
    CHECK(d0 * d2 < 0.0);
    CHECK(d1 * d3 < 0.0);
    CHECK(d0 * d1 > 0.0);
    check_manifest_covers(out, "scale");
}

TEST_CASE("video runs end to end deterministically") {
    testsupport::TempDir dir("cmd_video");
    const std::string config = make_video_fixture(dir, false);
    const std::string log = dir.path().string();

    const std::string out1 = dir.file("out1");
    const std::string out2 = dir.file("out2");
    CHECK(run_cli(PROMINENCE_CLI_PATH, "video --config \"" + config + "\" --jobs 1 --out \"" + out1 + "\"", log) == 0);
    CHECK(run_cli(PROMINENCE_CLI_PATH, "video --config \"" + config + "\" --jobs 4 --out \"" + out2 + "\"", log) == 0);
    CHECK(tree_hashes(out1) == tree_hashes(out2));

    CHECK(slurp(out1 + "/video/scenes.csv") ==
          "video_id,scene,start,end,keyframe\n"
          "vid0,0,0,1,0\n"
          "vid0,1,2,3,2\n"
          "vid0,2,4,5,4\n"
          "vid1,0,0,1,0\n"
          "vid1,1,2,3,2\n"
          "vid1,2,4,5,4\n");

    std::vector<FaceObservation> rows =
        read_observation_csv(out1 + "/video/observations.csv");
    REQUIRE(rows.size() == 12);
    int missing_depth = 0;
    for (const FaceObservation& row : rows) {
        if (std::isnan(row.depth_position)) ++missing_depth;
        CHECK(row.relative_size > 0.0);
        CHECK(row.election_year == 2016);
    }
    CHECK(missing_depth == 2);  // vid0 keyframe 4 has no depth map

    CHECK(rows[0].video_id == "vid0");
    CHECK(rows[0].frame_id == 0);
    CHECK(rows[0].gender == "female");
    CHECK(rows[0].party == "dem");
    CHECK(rows[0].candidate_id == "c0");
    CHECK(rows[0].depth_position == doctest::Approx(1.0));  // left box, near plane
    CHECK(rows[1].depth_position == doctest::Approx(0.0));  // right box, far plane
    CHECK(rows[0].relative_size == doctest::Approx(16.0 * 16.0 / (64.0 * 48.0)));

    const std::string report = slurp(out1 + "/video/models.txt");
    CHECK(report.find("Depth Model") != std::string::npos);
    CHECK(report.find("Face Size Model") != std::string::npos);
    CHECK(report.find("Num. obs.") != std::string::npos);
    CHECK(report.find("10") != std::string::npos);  // depth rows after deletion
    CHECK(report.find("12") != std::string::npos);
    CHECK(fs::is_regular_file(out1 + "/video/coefficients.csv"));
    check_manifest_covers(out1, "video");
}

TEST_CASE("video with no female faces reports the aliased interaction") {
    testsupport::TempDir dir("cmd_video_male");
    const std::string config = make_video_fixture(dir, true);
    const std::string out = dir.file("out");
    const int rc = run_cli(PROMINENCE_CLI_PATH, "video --config \"" + config + "\" --out \"" + out + "\"",
                           dir.path().string());
    CHECK(rc == 2);
    CHECK(fs::is_regular_file(out + "/video/observations.csv"));
    const std::string err = slurp(dir.file("stderr.txt"));
    CHECK(err.find("aliased") != std::string::npos);
    CHECK(err.find("Gender: Female") != std::string::npos);
}

TEST_CASE("regress refits an observation table written earlier") {
    testsupport::TempDir dir("cmd_regress");
    std::vector<FaceObservation> rows;
    Rng rng(3);
    const char* genders[2] = {"male", "female"};
    const char* parties[2] = {"dem", "rep"};
    int frame = 0;
    for (int g = 0; g < 2; ++g) {
        for (int p = 0; p < 2; ++p) {
            for (int rep = 0; rep < 3; ++rep, ++frame) {
                FaceObservation row;
                row.video_id = "v" + std::to_string(frame % 3);
                row.frame_id = frame;
                row.box = Box{0, 0, 10, 10};
                row.gender = genders[g];
                row.party = parties[p];
                row.candidate_id = "c" + std::to_string(rep % 2);
                row.election_year = 2016;
                row.candidate_visible = true;
                row.depth_position =
                    0.5 + 0.2 * g - 0.1 * p + 0.05 * normal01(rng);
                row.relative_size = 0.1 + 0.02 * g + 0.01 * normal01(rng);
                rows.push_back(std::move(row));
            }
        }
    }
    write_observation_csv(rows, dir.file("observations.csv"));

    const std::string out = dir.file("out");
    const int rc = run_cli(PROMINENCE_CLI_PATH, "regress --observations \"" + dir.file("observations.csv") +
                               "\" --out \"" + out + "\"",
                           dir.path().string());
    CHECK(rc == 0);
    const std::string report = slurp(out + "/regress/models.txt");
    CHECK(report.find("Gender: Female") != std::string::npos);
    CHECK(report.find("Num. obs.") != std::string::npos);
    CsvTable coef = read_csv_file(out + "/regress/coefficients.csv");
    CHECK(coef.header == std::vector<std::string>{"model", "term", "estimate", "se"});
    CHECK(coef.rows.size() == 6);  // 3 focal terms x 2 models
    check_manifest_covers(out, "regress");
}

TEST_CASE("hard errors exit with code 1") {
    testsupport::TempDir dir("cmd_errors");
    CHECK(run_cli(PROMINENCE_CLI_PATH, "video", dir.path().string()) == 1);  // frames_root unset
    CHECK(run_cli(PROMINENCE_CLI_PATH, "scale --dtm /no/such/file.csv", dir.path().string()) == 1);
    CHECK(run_cli(PROMINENCE_CLI_PATH, "--bogus-flag salience", dir.path().string()) == 1);
    nlohmann::json config = {{"frames_root", dir.file("missing_dir")}};
    spit(dir.file("config.json"), config.dump());
    CHECK(run_cli(PROMINENCE_CLI_PATH, "video --config \"" + dir.file("config.json") + "\"",
                  dir.path().string()) == 1);
}

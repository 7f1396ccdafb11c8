#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "object prominence pipeline: salience maps, visual-word scaling and "
        "video face metrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string dtm_csv;
    std::string observations_csv;

    CLI::Option* config_opt =
        app.add_option("--config", config_path, "JSON configuration file")
            ->check(CLI::ExistingFile);
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "override the configured random seed");
    CLI::Option* jobs_opt =
        app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    CLI::Option* out_opt = app.add_option("--out", out_dir, "output directory");

    CLI::App* salience = app.add_subcommand(
        "salience", "per-image salience maps and region prominence scores");
    CLI::App* scale = app.add_subcommand(
        "scale", "visual-word document-term matrix and ideal points");
    CLI::Option* dtm_opt = scale->add_option(
        "--dtm", dtm_csv, "scale an existing document-term CSV instead of images");
    CLI::App* video = app.add_subcommand(
        "video", "scene detection, face observation table and both models");
    CLI::App* regress = app.add_subcommand(
        "regress", "regression models over an existing observation CSV");
    CLI::Option* obs_opt = regress->add_option(
        "--observations", observations_csv, "observation table CSV");
    for (CLI::App* sub : {salience, scale, video, regress}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // keep the 0/1/2 contract instead of CLI11's own exit codes
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        prominence::cli::PipelineConfig config;
        if (config_opt->count() > 0) {
            config = prominence::cli::load_config(config_path);
        }
        // flags win over the file
        if (seed_opt->count() > 0) config.seed = seed;
        if (jobs_opt->count() > 0) config.jobs = jobs;
        if (out_opt->count() > 0) config.out_dir = out_dir;
        if (dtm_opt->count() > 0) config.dtm_csv = dtm_csv;
        if (obs_opt->count() > 0) config.observations_csv = observations_csv;
        prominence::cli::validate_config(config);

        if (salience->parsed()) return prominence::cli::cmd_salience(config);
        if (scale->parsed()) return prominence::cli::cmd_scale(config);
        if (video->parsed()) return prominence::cli::cmd_video(config);
        return prominence::cli::cmd_regress(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "leslab/pipeline.hpp"
#include "leslab/training.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace leslab;

int main(int argc, char** argv)
{
    CLI::App app{"Symmetry-preserving LES closure laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model;
    std::optional<std::string> out;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--model", model, "closure model")
            ->check(CLI::IsMember({"nomodel", "smag", "clark", "tbnn", "gconv", "conv"}));
        sub->add_option("--out", out, "output directory (overrides the config)");
    };
    auto* dns = app.add_subcommand("dns", "run the forced DNS and write snapshots");
    auto* filter = app.add_subcommand("filter", "filter DNS snapshots into (u_bar, tau) pairs");
    auto* train = app.add_subcommand("train", "train the selected closure model");
    auto* evaluate = app.add_subcommand("evaluate", "a-priori, a-posteriori and equivariance evaluation");
    auto* selftest = app.add_subcommand("selftest", "fast invariant checks");
    for (auto* sub : {dns, filter, train, evaluate, selftest})
        add_common(sub);

    pipeline::retain_heap_buffers();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pipeline::kExitValidation;
    }

    try {
        if (selftest->parsed())
            return pipeline::cmd_selftest(std::cout);

        config::RunConfig cfg;
        if (!config_path.empty())
            cfg = config::parse_file(config_path);
        if (seed)
            cfg.set_seed(*seed);
        if (model)
            cfg.model = closures::parse_variant(*model);
        if (out)
            cfg.out_dir = *out;
        if (cfg.sim.progress_every == 0)
            cfg.sim.progress_every = 10;

        if (dns->parsed())
            return pipeline::cmd_dns(cfg, std::cout);
        if (filter->parsed())
            return pipeline::cmd_filter(cfg, std::cout);
        if (train->parsed())
            return pipeline::cmd_train(cfg, std::cout);
        if (evaluate->parsed())
            return pipeline::cmd_evaluate(cfg, model ? std::optional(cfg.model) : std::nullopt, std::cout);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return pipeline::kExitValidation;
    } catch (const sim::InstabilityError& e) {
        std::cerr << "instability: " << e.what() << '\n';
        return pipeline::kExitInstability;
    } catch (const training::NonFiniteLoss& e) {
        std::cerr << "instability: " << e.what() << '\n';
        return pipeline::kExitInstability;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pipeline::kExitValidation;
    }
    return pipeline::kExitFailure;
}

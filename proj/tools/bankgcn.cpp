#include <iostream>

#include <CLI11.hpp>

#include "bankgcn/commands.hpp"

namespace {

void add_common(CLI::App* cmd, bankgcn::CommonOptions& common) {
    cmd->add_option("--config", common.config, "key = value config file");
    cmd->add_option("--set", common.overrides, "override one config key (key=value), repeatable");
    cmd->add_option("--seed", common.seed, "random seed");
    cmd->add_option("--out", common.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph classification with learnable spectral filter banks"};
    app.require_subcommand(1);

    bankgcn::CommonOptions common;

    auto* train = app.add_subcommand("train", "train and test over one or more seeded runs");
    add_common(train, common);

    bankgcn::EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    add_common(eval_cmd, common);
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--split", eval.split, "all, train, val or test");
    eval_cmd->add_option("--run", eval.run, "run index whose split to use");

    bankgcn::ExportOptions exp;
    auto* export_cmd = app.add_subcommand("export-response", "write filter frequency responses as CSV");
    add_common(export_cmd, common);
    export_cmd->add_option("--checkpoint", exp.checkpoint, "checkpoint file")->required();
    export_cmd->add_option("--layer", exp.layer, "layer index");
    export_cmd->add_option("--points", exp.points, "grid points on [0, 2]");

    bool inject_fault = false;
    auto* check = app.add_subcommand("check", "run the numerical property suite");
    add_common(check, common);
    check->add_flag("--inject-fault", inject_fault, "perturb one analytic gradient to test the harness");

    auto* gen = app.add_subcommand("gen-synthetic", "write the synthetic spectral dataset in TU format");
    add_common(gen, common);

    auto* inspect = app.add_subcommand("inspect-dataset", "print dataset statistics and parameter counts");
    add_common(inspect, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? bankgcn::kExitOk : bankgcn::kExitUsage;
    }

    if (*train) return bankgcn::cmd_train(common, std::cout, std::cerr);
    if (*eval_cmd) return bankgcn::cmd_eval(common, eval, std::cout, std::cerr);
    if (*export_cmd) return bankgcn::cmd_export_response(common, exp, std::cout, std::cerr);
    if (*check) return bankgcn::cmd_check(common, inject_fault, std::cout, std::cerr);
    if (*gen) return bankgcn::cmd_gen_synthetic(common, std::cout, std::cerr);
    if (*inspect) return bankgcn::cmd_inspect_dataset(common, std::cout, std::cerr);
    return bankgcn::kExitUsage;
}

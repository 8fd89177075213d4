// Command-line front end: graph building, synthetic data, training,
// evaluation, prediction and ablations.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numeric>

#include "semsal/config.hpp"
#include "semsal/knowledge.hpp"
#include "semsal/model.hpp"
#include "semsal/synthetic.hpp"
#include "semsal/tensor_io.hpp"
#include "semsal/training.hpp"

namespace {

using namespace semsal;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

std::vector<ProximityGraph> load_graphs(const std::vector<std::string>& paths,
                                        const std::vector<std::string>& categories) {
    std::vector<ProximityGraph> graphs;
    for (const auto& p : paths) graphs.push_back(load_graph(p, categories));
    return graphs;
}

void print_counts(const Model& model) {
    std::size_t total = 0;
    for (const auto& [group, n] : model.parameter_counts()) {
        std::cerr << "  " << group << ": " << n << "\n";
        total += n;
    }
    std::cerr << "  total: " << total << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Knowledge-guided saliency prediction"};
    app.require_subcommand(1);

    // build-graph
    std::string kind, input, categories_path, graph_out;
    std::optional<double> theta;
    auto* build = app.add_subcommand("build-graph", "Build a category proximity graph");
    build->add_option("--kind", kind, "cooccurrence or wup")->required()->check(CLI::IsMember({"cooccurrence", "wup"}));
    build->add_option("--input", input, "Corpus (cooccurrence) or taxonomy (wup) file")->required();
    build->add_option("--categories", categories_path, "One category per line")->required();
    build->add_option("--out", graph_out, "Output graph file")->required();
    build->add_option("--theta", theta, "Edge threshold (default 0.3 / 0.5)");

    // gen-data
    std::string spec_path, data_out;
    std::size_t count = 0;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen->add_option("--spec", spec_path, "Config file")->required();
    gen->add_option("--count", count, "Number of scenes")->required()->check(CLI::PositiveNumber);
    gen->add_option("--out", data_out, "Output directory")->required();

    // train
    std::string config_path, data_dir, ckpt_out, loss_csv;
    std::vector<std::string> graph_paths;
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    train_cmd->add_option("--config", config_path, "Config file")->required();
    train_cmd->add_option("--data", data_dir, "Dataset directory")->required();
    train_cmd->add_option("--graphs", graph_paths, "Comma-separated graph files; omit for no knowledge")->delimiter(',');
    train_cmd->add_option("--out", ckpt_out, "Checkpoint directory")->required();
    train_cmd->add_option("--loss-csv", loss_csv, "Loss curve CSV (default <out>/loss.csv)");

    // eval
    std::string ckpt_in, report_out, split = "all";
    std::uint64_t eval_seed = 1;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--ckpt", ckpt_in, "Checkpoint directory")->required();
    eval->add_option("--data", data_dir, "Dataset directory")->required();
    eval->add_option("--report", report_out, "Output CSV")->required();
    eval->add_option("--split", split, "all, train or val")->check(CLI::IsMember({"all", "train", "val"}));
    eval->add_option("--seed", eval_seed, "Shuffled-AUC resampling seed");

    // predict
    std::string image_path, boxes_path, pred_out;
    auto* pred = app.add_subcommand("predict", "Predict a saliency map for one image");
    pred->add_option("--ckpt", ckpt_in, "Checkpoint directory")->required();
    pred->add_option("--image", image_path, "GTSR tensor (3 x H x W) or PGM/PPM image")->required();
    pred->add_option("--boxes", boxes_path, "Region proposal file")->required();
    pred->add_option("--out", pred_out, "Output stem; writes <stem>.gtsr and <stem>.pgm")->required();

    // ablate
    std::string ablate_out;
    auto* abl = app.add_subcommand("ablate", "Compare knowledge-source selections over seeds");
    abl->add_option("--config", config_path, "Config file")->required();
    abl->add_option("--out", ablate_out, "Output CSV")->required();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Print a checkpoint's parameter counts");
    inspect->add_option("--ckpt", ckpt_in, "Checkpoint directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*build) {
        const auto categories = load_categories(categories_path);
        ProximityGraph g;
        if (kind == "wup") {
            g = build_wup_graph(Taxonomy::load(input), categories, theta.value_or(kWupTheta));
        } else {
            g = build_cooccurrence_graph(CooccurrenceCorpus::load(input), categories, theta.value_or(kCooccurrenceTheta));
        }
        auto out = open_output(graph_out);
        write_graph(out, g);
    } else if (*gen) {
        RunConfig config = load_config(spec_path);
        config.scene_count = count;
        const auto knowledge = load_knowledge(config);
        save_dataset(data_out, make_dataset(config, knowledge));
    } else if (*train_cmd) {
        const RunConfig config = load_config(config_path);
        const Dataset data = load_dataset(data_dir);
        auto graphs = load_graphs(graph_paths, data.categories);
        const auto progress = [&](const LossRecord& r) {
            if (r.iteration == 1 || r.iteration % 20 == 0 || r.iteration == config.iterations) {
                std::cerr << "iter " << r.iteration << " loss " << r.total << "\n";
            }
        };
        const TrainResult result = train(config, data, std::move(graphs), progress);
        save_checkpoint(ckpt_out, result.model);
        auto out = open_output(loss_csv.empty() ? std::filesystem::path(ckpt_out) / "loss.csv" : std::filesystem::path(loss_csv));
        write_loss_csv(out, result.curve);
        std::cerr << "parameters:\n";
        print_counts(result.model);
    } else if (*eval) {
        const Model model = load_checkpoint(ckpt_in);
        const Dataset data = load_dataset(data_dir);
        std::vector<std::size_t> indices;
        if (split == "train") indices = data.split.train;
        else if (split == "val") indices = data.split.val;
        else {
            indices.resize(data.samples.size());
            std::iota(indices.begin(), indices.end(), std::size_t{0});
        }
        const EvalReport report = evaluate(model, data, indices, eval_seed);
        auto out = open_output(report_out);
        write_eval_csv(out, report);
    } else if (*pred) {
        const Model model = load_checkpoint(ckpt_in);
        const std::filesystem::path img(image_path);
        const Tensor image = img.extension() == ".gtsr" ? load_gtsr(img) : load_pnm_rgb(img);
        const LabeledBoxes boxes = load_boxes(boxes_path);
        Tensor map;
        {
            NoGradGuard guard;
            map = forward(model, image, boxes.boxes).saliency;
        }
        save_gtsr(pred_out + ".gtsr", map);
        save_pgm(pred_out + ".pgm", map);
    } else if (*abl) {
        const RunConfig config = load_config(config_path);
        const auto knowledge = load_knowledge(config);
        const auto rows = ablate(config, knowledge);
        auto out = open_output(ablate_out);
        write_ablation_csv(out, rows);
    } else if (*inspect) {
        const Model model = load_checkpoint(ckpt_in);
        for (const auto& [group, n] : model.parameter_counts()) std::cout << group << "," << n << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const semsal::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

// Command-line harness: transform training, index build, search, ground
// truth, compaction diagnostics, and benchmark sweeps emitting CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>

#include "pano/bench.hpp"
#include "pano/io.hpp"

using namespace pano;

namespace {

MatrixF load_matrix(const std::string& path) {
    return read_vectors(path, vector_format_from_name(path));
}

MatrixF sample_queries(const MatrixF& queries, std::size_t nq, std::uint64_t seed) {
    if (nq == 0 || nq >= queries.rows) {
        return queries;
    }
    std::vector<std::size_t> order(queries.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(nq);
    std::sort(order.begin(), order.end());
    MatrixF out(nq, queries.cols);
    for (std::size_t i = 0; i < nq; ++i) {
        auto src = queries.row(order[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

std::string sniff_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    PANO_REQUIRE(in.good(), "cannot open " + path);
    char magic[5] = {};
    in.read(magic, 5);
    PANO_REQUIRE(in.gcount() == 5, "file too short: " + path);
    return {magic, 5};
}

EngineVariant variant_from_name(const std::string& name) {
    if (name == "point_centric") return EngineVariant::point_centric;
    if (name == "batch_noub") return EngineVariant::batch_noub;
    if (name == "batch_ub") return EngineVariant::batch_ub;
    PANO_REQUIRE(false, "unknown engine variant '" + name + "'");
    return EngineVariant::batch_noub;
}

std::ostream& open_output(std::ofstream& file, const std::string& out_path) {
    if (out_path.empty()) {
        return std::cout;
    }
    file.open(out_path, std::ios::trunc);
    PANO_REQUIRE(file.good(), "cannot write " + out_path);
    return file;
}

void add_config_file(CLI::App* cmd) {
    cmd->set_config("--config", "", "key=value file; command-line flags override it");
}

struct SearchArgs {
    std::string index_path, queries_path, gt_path, out_path, mode = "both";
    std::string variant = "batch_noub";
    std::size_t k = 10, n_probe = 1, ef_search = 64, reps = 5, nq = 0;
    std::uint64_t seed = 0;
};

int cmd_search(const SearchArgs& args) {
    MatrixF queries = sample_queries(load_matrix(args.queries_path), args.nq, args.seed);
    std::vector<std::vector<idx_t>> truth;
    if (!args.gt_path.empty()) {
        truth = read_ivecs_ids(args.gt_path);
        PANO_REQUIRE(truth.size() == queries.rows,
                     "ground truth rows must match the query count");
    }
    BenchOptions opts;
    opts.k = args.k;
    opts.repetitions = args.reps;
    opts.engine.variant = variant_from_name(args.variant);
    if (opts.engine.variant == EngineVariant::point_centric) {
        opts.engine.batch_size = 1;
    }

    std::vector<SearchMode> modes;
    if (args.mode == "both") {
        modes = {SearchMode::baseline, SearchMode::panorama};
    } else {
        modes = {search_mode_from_name(args.mode)};
    }

    std::ofstream file;
    std::ostream& out = open_output(file, args.out_path);
    SweepRow::write_header(out);
    std::string magic = sniff_magic(args.index_path);
    for (SearchMode mode : modes) {
        SweepRow row;
        row.row = "grid";
        row.mode = to_string(mode);
        RunStats stats;
        if (magic == "PFLT1") {
            FlatIndex index = FlatIndex::load(args.index_path);
            stats = run_flat(index, queries, truth, mode, opts);
            row.index = "flat";
            row.param = "none";
        } else if (magic == "PIVF1") {
            IvfFlatIndex index = IvfFlatIndex::load(args.index_path);
            stats = run_ivf(index, queries, truth, args.n_probe, mode, opts);
            row.index = "ivf";
            row.param = "nprobe";
            row.value = static_cast<double>(args.n_probe);
        } else if (magic == "PHNW1") {
            HnswIndex index = HnswIndex::load(args.index_path);
            stats = run_hnsw(index, queries, truth, args.ef_search, mode, opts);
            row.index = "hnsw";
            row.param = "efsearch";
            row.value = static_cast<double>(args.ef_search);
        } else {
            PANO_REQUIRE(false, "unrecognized index file " + args.index_path);
        }
        row.recall = stats.recall;
        row.qps = stats.qps;
        row.phi = stats.phi;
        row.feature_terms = stats.feature_terms;
        row.wall_ms = stats.wall_ms;
        row.write(out);
    }
    return 0;
}

struct SweepArgs {
    std::string index_path, queries_path, gt_path, out_path;
    std::string variant = "batch_noub";
    std::vector<std::size_t> grid;
    std::size_t k = 10, reps = 5, nq = 0;
    std::uint64_t seed = 0;
    double factor = 1.2;
};

int cmd_sweep(const SweepArgs& args) {
    MatrixF queries = sample_queries(load_matrix(args.queries_path), args.nq, args.seed);
    auto truth = read_ivecs_ids(args.gt_path);
    PANO_REQUIRE(truth.size() == queries.rows, "ground truth rows must match the query count");
    BenchOptions opts;
    opts.k = args.k;
    opts.repetitions = args.reps;
    opts.denoise_factor = args.factor;
    opts.engine.variant = variant_from_name(args.variant);
    if (opts.engine.variant == EngineVariant::point_centric) {
        opts.engine.batch_size = 1;
    }

    std::string magic = sniff_magic(args.index_path);
    std::vector<SweepRow> rows;
    if (magic == "PFLT1") {
        FlatIndex index = FlatIndex::load(args.index_path);
        rows = sweep_flat(index, queries, truth, opts);
    } else if (magic == "PIVF1") {
        PANO_REQUIRE(!args.grid.empty(), "sweep: --grid of n_probe values is required for ivf");
        IvfFlatIndex index = IvfFlatIndex::load(args.index_path);
        rows = sweep_ivf(index, queries, truth, args.grid, opts);
    } else if (magic == "PHNW1") {
        PANO_REQUIRE(!args.grid.empty(), "sweep: --grid of ef_search values is required for hnsw");
        HnswIndex index = HnswIndex::load(args.index_path);
        rows = sweep_hnsw(index, queries, truth, args.grid, opts);
    } else {
        PANO_REQUIRE(false, "unrecognized index file " + args.index_path);
    }

    std::ofstream file;
    std::ostream& out = open_output(file, args.out_path);
    SweepRow::write_header(out);
    for (const auto& row : rows) {
        row.write(out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned-transform kNN refinement toolkit"};
    app.require_subcommand(1);

    // train
    std::string t_data, t_out;
    TrainConfig t_config;
    auto* train = app.add_subcommand("train", "learn an energy-compacting orthogonal transform");
    train->add_option("--data", t_data, "input vectors (fvecs/ivecs/bvecs)")->required();
    train->add_option("--out", t_out, "output transform file (PNRM1)")->required();
    train->add_option("--alpha-target", t_config.alpha_target, "target decay rate");
    train->add_option("--gamma", t_config.gamma, "Cayley step size");
    train->add_option("--lr", t_config.learning_rate, "Adam learning rate");
    train->add_option("--epochs", t_config.max_epochs, "max epochs");
    train->add_option("--patience", t_config.patience, "early-stopping patience");
    train->add_option("--train-frac", t_config.train_fraction, "training split fraction");
    train->add_option("--val-frac", t_config.val_fraction, "validation split fraction");
    train->add_option("--seed", t_config.seed, "split / determinism seed");
    add_config_file(train);

    // transform
    std::string tf_data, tf_model, tf_out;
    auto* transform = app.add_subcommand("transform", "apply a transform to vectors");
    transform->add_option("--data", tf_data, "input vectors")->required();
    transform->add_option("--model", tf_model, "transform file")->required();
    transform->add_option("--out", tf_out, "output fvecs")->required();
    add_config_file(transform);

    // build
    std::string b_type, b_data, b_out, b_model;
    std::size_t b_levels = 32, b_batch = 256, b_nlist = 64, b_M = 16, b_efc = 40;
    std::uint64_t b_seed = 0;
    auto* build = app.add_subcommand("build", "build an index file");
    build->add_option("--type", b_type, "flat | ivf | hnsw")->required();
    build->add_option("--data", b_data, "input vectors")->required();
    build->add_option("--out", b_out, "output index file")->required();
    build->add_option("--model", b_model, "optional transform file");
    build->add_option("--levels", b_levels, "number of refinement levels");
    build->add_option("--batch", b_batch, "level-major batch width");
    build->add_option("--nlist", b_nlist, "ivf cluster count");
    build->add_option("--seed", b_seed, "k-means / level-assignment seed");
    build->add_option("-M,--M", b_M, "hnsw neighbors per node");
    build->add_option("--efc", b_efc, "hnsw construction beam width");
    add_config_file(build);

    // gt
    std::string g_data, g_queries, g_out;
    std::size_t g_k = 10;
    auto* gt = app.add_subcommand("gt", "exact ground truth by brute force");
    gt->add_option("--data", g_data)->required();
    gt->add_option("--queries", g_queries)->required();
    gt->add_option("--k", g_k);
    gt->add_option("--out", g_out, "output ivecs of neighbor ids")->required();
    add_config_file(gt);

    // search
    SearchArgs s_args;
    auto* search = app.add_subcommand("search", "run queries against an index");
    search->add_option("--index", s_args.index_path)->required();
    search->add_option("--queries", s_args.queries_path)->required();
    search->add_option("--k", s_args.k);
    search->add_option("--mode", s_args.mode, "baseline | panorama | both");
    search->add_option("--nprobe", s_args.n_probe, "ivf probes");
    search->add_option("--efsearch", s_args.ef_search, "hnsw beam width");
    search->add_option("--gt", s_args.gt_path, "ground truth for recall");
    search->add_option("--reps", s_args.reps, "timing repetitions");
    search->add_option("--nq", s_args.nq, "sample this many queries");
    search->add_option("--seed", s_args.seed, "query sampling seed");
    search->add_option("--variant", s_args.variant, "point_centric | batch_noub | batch_ub");
    search->add_option("--out", s_args.out_path, "CSV path (default stdout)");
    add_config_file(search);

    // sweep
    SweepArgs w_args;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep over both modes");
    sweep->add_option("--index", w_args.index_path)->required();
    sweep->add_option("--queries", w_args.queries_path)->required();
    sweep->add_option("--gt", w_args.gt_path)->required();
    sweep->add_option("--grid", w_args.grid, "n_probe or ef_search values")->delimiter(',');
    sweep->add_option("--k", w_args.k);
    sweep->add_option("--reps", w_args.reps);
    sweep->add_option("--nq", w_args.nq);
    sweep->add_option("--seed", w_args.seed);
    sweep->add_option("--factor", w_args.factor, "Pareto denoise factor");
    sweep->add_option("--variant", w_args.variant);
    sweep->add_option("--out", w_args.out_path, "CSV path (default stdout)");
    add_config_file(sweep);

    // alpha
    std::string a_data, a_model, a_out;
    auto* alpha = app.add_subcommand("alpha", "compaction report over (transformed) vectors");
    alpha->add_option("--data", a_data)->required();
    alpha->add_option("--model", a_model, "optional transform file");
    alpha->add_option("--out", a_out, "CSV path (default stdout)");
    add_config_file(alpha);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            MatrixF data = load_matrix(t_data);
            TrainReport report;
            TransformModel model = train_transform(data, t_config, &report);
            save_transform(t_out, model);
            std::cout << "trained d=" << model.dim << " epochs=" << report.epochs_run
                      << " warm_start_loss=" << report.warm_start_train_loss
                      << " final_loss=" << report.final_train_loss
                      << " val_loss=" << report.best_val_loss
                      << " fallback=" << (report.fell_back_to_warm_start ? 1 : 0)
                      << " ortho_err=" << model.orthogonality_error() << "\n";
            return 0;
        }
        if (transform->parsed()) {
            TransformModel model = load_transform(tf_model);
            write_vectors(tf_out, model.apply(load_matrix(tf_data)), VectorFormat::fvecs);
            return 0;
        }
        if (build->parsed()) {
            MatrixF data = load_matrix(b_data);
            LevelSpec levels = make_uniform_levels(data.cols, b_levels);
            TransformModel model;
            const TransformModel* model_ptr = nullptr;
            if (!b_model.empty()) {
                model = load_transform(b_model);
                model_ptr = &model;
            }
            if (b_type == "flat") {
                FlatIndex::build(data, levels, model_ptr, b_batch).save(b_out);
            } else if (b_type == "ivf") {
                IvfFlatIndex::build(data, b_nlist, b_seed, levels, model_ptr, b_batch).save(b_out);
            } else if (b_type == "hnsw") {
                HnswParams params;
                params.M = b_M;
                params.ef_construction = b_efc;
                params.seed = b_seed;
                HnswIndex::build(data, params, levels, model_ptr).save(b_out);
            } else {
                PANO_REQUIRE(false, "unknown index type '" + b_type + "'");
            }
            std::cout << "built " << b_type << " index over " << data.rows << " vectors -> "
                      << b_out << "\n";
            return 0;
        }
        if (gt->parsed()) {
            write_ivecs_ids(g_out, ground_truth(load_matrix(g_data), load_matrix(g_queries), g_k));
            return 0;
        }
        if (search->parsed()) {
            return cmd_search(s_args);
        }
        if (sweep->parsed()) {
            return cmd_sweep(w_args);
        }
        if (alpha->parsed()) {
            MatrixF data = load_matrix(a_data);
            if (!a_model.empty()) {
                data = load_transform(a_model).apply(data);
            }
            CompactionReport report = estimate_alpha(data);
            if (report.infinite_alpha_count > 0) {
                std::cerr << "warning: " << report.infinite_alpha_count
                          << " sampling fraction(s) hit a zero tail; excluded from alpha_hat\n";
            }
            std::ofstream file;
            std::ostream& out = open_output(file, a_out);
            report.write_csv(out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// ppcmt: point cloud completion toolkit front door.
// Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numeric or
// validation failure. One key=value result block on stdout; diagnostics on
// stderr.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppcmt/cloud_io.hpp"
#include "ppcmt/core_geometry.hpp"
#include "ppcmt/metrics.hpp"
#include "ppcmt/nn.hpp"
#include "ppcmt/pca.hpp"
#include "ppcmt/pipeline.hpp"
#include "ppcmt/rng.hpp"

namespace fs = std::filesystem;
using namespace ppcmt;

namespace {

void emit(const std::string& key, const std::string& value) {
    std::cout << key << "=" << value << "\n";
}

void emit(const std::string& key, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    std::cout << key << "=" << std::string(buf, ptr) << "\n";
}

void emit(const std::string& key, std::size_t value) { std::cout << key << "=" << value << "\n"; }

std::vector<std::string> sorted_cloud_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".xyz" || ext == ".pcf") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError("no .xyz or .pcf files in " + dir);
    return files;
}

int run_decompose(const std::string& input, std::size_t subsets, const std::string& strategy,
                  std::uint64_t seed, const std::string& out_prefix, const std::string& format) {
    const PointCloud cloud = read_cloud(input);
    const DecomposeStrategy strat =
        strategy == "random" ? DecomposeStrategy::random_uniform : DecomposeStrategy::pca_uniform;
    const Decomposition dec = decompose(cloud, subsets, strat, seed);
    const CloudFormat fmt = format == "pcf" ? CloudFormat::pcf : CloudFormat::xyz;
    const std::string ext = format == "pcf" ? ".pcf" : ".xyz";

    emit("input_points", cloud.size());
    emit("subsets", subsets);
    emit("strategy", strategy);
    for (std::size_t u = 0; u < subsets; ++u) {
        const std::string path = out_prefix + "_" + std::to_string(u + 1) + ext;
        write_cloud(path, dec.subsets[u], fmt);
        emit("subset_" + std::to_string(u + 1), path);
        emit("subset_" + std::to_string(u + 1) + ".points", dec.subsets[u].size());
    }
    return 0;
}

int run_metrics(const std::string& pred_path, const std::string& gt_path,
                const std::string& which, double tau, double alpha,
                const std::string& normalize) {
    PointCloud pred = read_cloud(pred_path);
    PointCloud gt = read_cloud(gt_path);
    if (normalize == "unit-sphere") {
        pred = normalize_unit_sphere(pred);
        gt = normalize_unit_sphere(gt);
    }

    MetricReport report;
    std::string token;
    std::istringstream parts(which);
    while (std::getline(parts, token, ',')) {
        if (token == "cd") {
            const ChamferBreakdown cb = chamfer(pred, gt);
            report.add("cd_l", cb.cd_l, "mean directed pred->gt");
            report.add("cd_g", cb.cd_g, "mean directed gt->pred");
            report.add("cd_l1", cb.cd_l1, "mean-of-directed-means");
            report.add("cd_l2", cb.cd_l2, "sum-of-directed-mean-squares");
        } else if (token == "dcd") {
            report.add("dcd", dcd(pred, gt, alpha), "density-aware, bounded [0,1]",
                       {{"alpha", alpha}});
        } else if (token == "emd") {
            const EmdResult e = emd(pred, gt);
            report.add("emd", e.value, e.exact ? "exact hungarian, mean matched distance"
                                               : "auction approximation, mean matched distance");
            report.add("emd.exact", e.exact ? 1.0 : 0.0);
            if (!e.exact) report.add("emd.epsilon", e.epsilon);
        } else if (token == "fscore") {
            report.add("fscore", fscore(pred, gt, tau), "harmonic precision/recall",
                       {{"tau", tau}});
        } else if (token == "fidelity") {
            report.add("fidelity", fidelity(pred, gt), "mean input->output NN distance");
        } else {
            throw CLI::ValidationError("--which", "unknown metric: " + token);
        }
    }
    report.validate();
    for (const MetricEntry& e : report.entries) {
        emit(e.name, e.value);
        for (const auto& [name, value] : e.params) emit(e.name + "." + name, value);
    }
    return 0;
}

int run_complete(const std::string& input, const std::string& config_arg,
                 const std::string& weights_path, const std::string& out,
                 const std::string& dump_stages) {
    const ModelConfig config = load_config(config_arg);
    const WeightStore weights = read_weights(weights_path, config);
    const PointCloud cloud = read_cloud(input);
    const CompletionResult result = complete(cloud, config, weights, !dump_stages.empty());

    write_cloud(out, result.output);
    emit("input_points", cloud.size());
    emit("output_points", result.output.size());
    emit("seeds", result.seeds.size());
    emit("out", out);

    if (!dump_stages.empty()) {
        fs::create_directories(dump_stages);
        const auto stage_path = [&](const std::string& name) {
            return (fs::path(dump_stages) / name).string();
        };
        write_cloud(stage_path("candidates.xyz"), result.candidates);
        write_cloud(stage_path("seeds.xyz"), result.seeds);
        for (std::size_t u = 0; u < result.parts.size(); ++u)
            write_cloud(stage_path("part_" + std::to_string(u + 1) + ".xyz"), result.parts[u]);
        write_cloud(stage_path("output.xyz"), result.output);
        WeightStore stages;
        stages.put("stage.extracted", result.stages->extracted);
        stages.put("stage.encoded", result.stages->encoded);
        stages.put("stage.seed_feats", result.stages->seed_feats);
        stages.put("stage.decoded", result.stages->decoded);
        write_weights(stage_path("stages.pwt"), stages);
        emit("stages_dir", dump_stages);
    }
    return 0;
}

int run_synth(const std::string& shape, std::size_t points, std::uint64_t seed,
              const std::string& out, double crop_fraction,
              const std::vector<double>& viewpoint, const std::string& out_missing) {
    ShapeKind kind;
    if (shape == "sphere") kind = ShapeKind::sphere;
    else if (shape == "cuboid") kind = ShapeKind::cuboid;
    else if (shape == "cylinder") kind = ShapeKind::cylinder;
    else if (shape == "torus") kind = ShapeKind::torus;
    else throw CLI::ValidationError("--shape", "unknown shape: " + shape);

    const PointCloud cloud = synth_shape(kind, points, seed);
    emit("shape", shape);
    emit("points", cloud.size());
    if (crop_fraction > 0.0) {
        CropResult crop = viewpoint.empty()
                              ? crop_viewpoint(cloud, crop_fraction, seed)
                              : crop_viewpoint_at(cloud, crop_fraction,
                                                  {viewpoint[0], viewpoint[1], viewpoint[2]});
        write_cloud(out, crop.partial);
        emit("out", out);
        emit("partial_points", crop.partial.size());
        emit("removed_points", crop.missing.size());
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", crop.viewpoint.x, crop.viewpoint.y,
                      crop.viewpoint.z);
        emit("viewpoint", std::string(buf));
        if (!out_missing.empty()) {
            write_cloud(out_missing, crop.missing);
            emit("out_missing", out_missing);
        }
    } else {
        write_cloud(out, cloud);
        emit("out", out);
    }
    return 0;
}

int run_uniformity(const std::string& input, const std::vector<double>& ps, std::size_t seeds,
                   const std::string& normalize) {
    PointCloud cloud = read_cloud(input);
    if (normalize == "unit-sphere") cloud = normalize_unit_sphere(cloud);
    emit("points", cloud.size());
    emit("seeds", seeds);
    for (double p : ps) {
        char key[48];
        std::snprintf(key, sizeof(key), "uniformity.%g", p);
        emit(key, uniformity(cloud, p, seeds));
    }
    return 0;
}

int run_sequence_metrics(const std::string& dir) {
    const std::vector<std::string> files = sorted_cloud_files(dir);
    if (files.size() < 2) throw std::invalid_argument("consistency needs at least 2 frames");
    std::vector<PointCloud> frames;
    frames.reserve(files.size());
    for (const std::string& f : files) frames.push_back(read_cloud(f));
    emit("frames", frames.size());
    emit("consistency", consistency(frames));
    return 0;
}

int run_mmd(const std::string& output_path, const std::string& reference_dir) {
    const PointCloud output = read_cloud(output_path);
    const std::vector<std::string> files = sorted_cloud_files(reference_dir);
    double best = std::numeric_limits<double>::infinity();
    std::string best_file;
    for (const std::string& f : files) {
        const double value = chamfer(output, read_cloud(f)).cd_l1;
        if (value < best) {
            best = value;
            best_file = f;
        }
    }
    emit("references", files.size());
    emit("mmd", best);
    emit("best_reference", best_file);
    return 0;
}

int run_bench_scan(std::size_t length, std::size_t channels, std::size_t runs) {
    using clock = std::chrono::steady_clock;
    double seq_ms = 0.0, par_ms = 0.0, max_rel = 0.0;
    for (std::size_t run = 0; run < runs; ++run) {
        Rng rng(run + 1);
        SsmParams params;
        params.a = Tensor({channels, 8});
        params.wb = Tensor({channels, 8});
        params.wc = Tensor({channels, 8});
        params.dtw = Tensor({channels});
        params.dtb = Tensor({channels});
        params.dskip = Tensor({channels});
        for (double& v : params.a.data) v = rng.uniform(-2.0, -0.1);
        for (double& v : params.wb.data) v = rng.uniform(-0.5, 0.5);
        for (double& v : params.wc.data) v = rng.uniform(-0.5, 0.5);
        for (double& v : params.dtw.data) v = rng.uniform(-0.5, 0.5);
        for (double& v : params.dtb.data) v = rng.uniform(-4.0, -2.0);
        for (double& v : params.dskip.data) v = rng.uniform(-1.0, 1.0);
        Tensor x({length, channels});
        for (double& v : x.data) v = rng.uniform(-1.0, 1.0);

        const auto t0 = clock::now();
        const Tensor seq = ssm_scan(params, x, ScanMode::sequential);
        const auto t1 = clock::now();
        const Tensor par = ssm_scan(params, x, ScanMode::parallel);
        const auto t2 = clock::now();
        seq_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        par_ms += std::chrono::duration<double, std::milli>(t2 - t1).count();
        for (std::size_t i = 0; i < seq.numel(); ++i)
            max_rel = std::max(max_rel, std::abs(par.data[i] - seq.data[i]) /
                                            std::max(1e-9, std::abs(seq.data[i])));
    }
    emit("length", length);
    emit("channels", channels);
    emit("runs", runs);
    emit("seq_ms_mean", seq_ms / static_cast<double>(runs));
    emit("par_ms_mean", par_ms / static_cast<double>(runs));
    emit("max_rel_diff", max_rel);
    return 0;
}

int run_init_weights(const std::string& config_arg, std::uint64_t seed, const std::string& out) {
    const ModelConfig config = load_config(config_arg);
    const WeightStore store = init_weights(config, seed);
    validate_weights(store, config);
    write_weights(out, store);
    std::size_t values = 0;
    for (const auto& [name, tensor] : store.tensors()) values += tensor.numel();
    emit("tensors", store.tensors().size());
    emit("values", values);
    emit("out", out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPC-MT point cloud completion toolkit"};
    app.require_subcommand(1);

    auto* dec = app.add_subcommand("decompose", "PCA-sort and interleave a cloud into U subsets");
    std::string dec_input, dec_strategy = "pca", dec_prefix, dec_format = "xyz";
    std::size_t dec_subsets = 4;
    std::uint64_t dec_seed = 0;
    dec->add_option("--input", dec_input, "input cloud (.xyz or .pcf)")->required();
    dec->add_option("--subsets", dec_subsets, "subset count U")->required();
    dec->add_option("--strategy", dec_strategy)->check(CLI::IsMember({"pca", "random"}));
    dec->add_option("--seed", dec_seed, "PRNG seed for the random strategy");
    dec->add_option("--out-prefix", dec_prefix, "output prefix, writes <prefix>_1..U")->required();
    dec->add_option("--format", dec_format)->check(CLI::IsMember({"xyz", "pcf"}));

    auto* met = app.add_subcommand("metrics", "paired metrics between two clouds");
    std::string met_pred, met_gt, met_which = "cd,dcd,emd,fscore", met_norm = "none";
    double met_tau = 0.01, met_alpha = 1000.0;
    met->add_option("--pred", met_pred)->required();
    met->add_option("--gt", met_gt)->required();
    met->add_option("--which", met_which, "comma list: cd,dcd,emd,fscore,fidelity");
    met->add_option("--tau", met_tau, "fscore threshold");
    met->add_option("--alpha", met_alpha, "dcd sharpness");
    met->add_option("--normalize", met_norm)->check(CLI::IsMember({"unit-sphere", "none"}));

    auto* cmp = app.add_subcommand("complete", "run the full forward pass");
    std::string cmp_input, cmp_config, cmp_weights, cmp_out, cmp_dump;
    cmp->add_option("--input", cmp_input)->required();
    cmp->add_option("--config", cmp_config, "config json path, or 'desk'/'paper'")->required();
    cmp->add_option("--weights", cmp_weights)->required();
    cmp->add_option("--out", cmp_out)->required();
    cmp->add_option("--dump-stages", cmp_dump, "directory for per-stage snapshots");

    auto* syn = app.add_subcommand("synth", "sample a synthetic surface");
    std::string syn_shape, syn_out, syn_out_missing;
    std::size_t syn_points = 512;
    std::uint64_t syn_seed = 0;
    double syn_crop = 0.0;
    std::vector<double> syn_viewpoint;
    syn->add_option("--shape", syn_shape, "sphere|cuboid|cylinder|torus")->required();
    syn->add_option("--points", syn_points)->required();
    syn->add_option("--seed", syn_seed);
    syn->add_option("--out", syn_out)->required();
    syn->add_option("--crop-fraction", syn_crop, "remove this fraction nearest a viewpoint");
    syn->add_option("--viewpoint", syn_viewpoint, "x,y,z crop viewpoint")
        ->delimiter(',')
        ->expected(3);
    syn->add_option("--out-missing", syn_out_missing, "also write the removed part");

    auto* uni = app.add_subcommand("uniformity", "distribution uniformity at one or more p");
    std::string uni_input, uni_norm = "none";
    std::vector<double> uni_ps;
    std::size_t uni_seeds = 100;
    uni->add_option("--input", uni_input)->required();
    uni->add_option("--p", uni_ps, "comma list of area fractions")->delimiter(',')->required();
    uni->add_option("--seeds", uni_seeds, "FPS seed count M");
    uni->add_option("--normalize", uni_norm)->check(CLI::IsMember({"unit-sphere", "none"}));

    auto* seq = app.add_subcommand("sequence-metrics", "consistency over ordered frames");
    std::string seq_dir;
    seq->add_option("--dir", seq_dir, "directory of frames, lexicographic order")->required();

    auto* mmd_cmd = app.add_subcommand("mmd", "minimum matching distance to a reference set");
    std::string mmd_output, mmd_dir;
    mmd_cmd->add_option("--output", mmd_output)->required();
    mmd_cmd->add_option("--reference-dir", mmd_dir)->required();

    auto* bench = app.add_subcommand("bench", "micro benchmarks");
    bench->require_subcommand(1);
    auto* scan = bench->add_subcommand("scan", "parallel vs sequential SSM scan");
    std::size_t scan_len = 4096, scan_channels = 64, scan_runs = 5;
    scan->add_option("--length", scan_len);
    scan->add_option("--channels", scan_channels);
    scan->add_option("--runs", scan_runs);

    auto* init = app.add_subcommand("init-weights", "deterministic weight initialization");
    std::string init_config, init_out;
    std::uint64_t init_seed = 0;
    init->add_option("--config", init_config, "config json path, or 'desk'/'paper'")->required();
    init->add_option("--seed", init_seed)->required();
    init->add_option("--out", init_out)->required();

    try {
        app.parse(argc, argv);
        if (*dec)
            return run_decompose(dec_input, dec_subsets, dec_strategy, dec_seed, dec_prefix,
                                 dec_format);
        if (*met) return run_metrics(met_pred, met_gt, met_which, met_tau, met_alpha, met_norm);
        if (*cmp) return run_complete(cmp_input, cmp_config, cmp_weights, cmp_out, cmp_dump);
        if (*syn)
            return run_synth(syn_shape, syn_points, syn_seed, syn_out, syn_crop, syn_viewpoint,
                             syn_out_missing);
        if (*uni) return run_uniformity(uni_input, uni_ps, uni_seeds, uni_norm);
        if (*seq) return run_sequence_metrics(seq_dir);
        if (*mmd_cmd) return run_mmd(mmd_output, mmd_dir);
        if (*scan) return run_bench_scan(scan_len, scan_channels, scan_runs);
        if (*init) return run_init_weights(init_config, init_seed, init_out);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

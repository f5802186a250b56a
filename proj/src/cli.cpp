#include "fleximo/cli.hpp"

#include "fleximo/diagnostics.hpp"
#include "fleximo/encoder.hpp"
#include "fleximo/fkt.hpp"
#include "fleximo/resize.hpp"
#include "fleximo/suites.hpp"
#include "fleximo/wavegen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cctype>
#include <fstream>
#include <iostream>

namespace fleximo::cli {

namespace {

using nlohmann::json;

constexpr const char* kReportSchema = "fleximo-report/1";

// Companion file carrying the bias vector of a kernel file.
std::string bias_path(const std::string& kernel_path) {
    const std::string suffix = ".fkt";
    if (kernel_path.size() > suffix.size() &&
        kernel_path.compare(kernel_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return kernel_path.substr(0, kernel_path.size() - suffix.size()) + ".bias.fkt";
    }
    return kernel_path + ".bias.fkt";
}

bool file_exists(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return f.good();
}

ImageCHW read_image(const std::string& path) {
    SidecarMeta meta;
    const TensorData t = fkt_read(path, &meta);
    if (t.dims.size() != 3) {
        throw FormatError("image file '" + path + "' must hold a rank-3 [C,H,W] tensor, "
                          "got rank " + std::to_string(t.dims.size()));
    }
    ImageCHW img;
    img.c = t.dims[0];
    img.h = t.dims[1];
    img.w = t.dims[2];
    img.data = t.data;
    if (meta.lambdas_um) img.lambdas = WavelengthSpec{*meta.lambdas_um};
    img.gsd_m = meta.gsd_m;
    img.validate();
    return img;
}

struct KernelFile {
    Tensor4 weights;
    std::vector<double> bias;
    SidecarMeta meta;
    bool has_bias_file = false;
};

KernelFile read_kernel(const std::string& path) {
    KernelFile k;
    const TensorData t = fkt_read(path, &k.meta);
    if (t.dims.size() != 4) {
        throw FormatError("kernel file '" + path + "' must hold a rank-4 [D,C,P,P] "
                          "tensor, got rank " + std::to_string(t.dims.size()));
    }
    k.weights = t.to_tensor4();
    if (k.meta.lambdas_um && k.meta.lambdas_um->size() != k.weights.dim(1)) {
        throw SpectralMismatchError("kernel has " + std::to_string(k.weights.dim(1)) +
                                    " channels but sidecar lists " +
                                    std::to_string(k.meta.lambdas_um->size()) +
                                    " wavelengths");
    }
    const std::string bp = bias_path(path);
    if (file_exists(bp)) {
        const TensorData b = fkt_read(bp);
        if (b.dims.size() != 1 || b.dims[0] != k.weights.dim(0)) {
            throw FormatError("bias file '" + bp + "' must hold a rank-1 tensor of length " +
                              std::to_string(k.weights.dim(0)));
        }
        k.bias = b.data;
        k.has_bias_file = true;
    } else {
        k.bias.assign(k.weights.dim(0), 0.0);
    }
    return k;
}

json check_to_json(const CheckResult& c) {
    json j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["value"] = c.value;
    j["limit"] = c.limit;
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

json report_to_json(const FidelityReport& r) {
    json j;
    j["strategy"] = r.strategy;
    j["src_patch"] = r.src_patch;
    j["dst_patch"] = r.dst_patch;
    j["trials"] = r.trials;
    j["mean_dot_err"] = r.mean_dot_err;
    j["max_dot_err"] = r.max_dot_err;
    j["norm_ratio_mean"] = r.norm_ratio_mean;
    j["norm_ratio_std"] = r.norm_ratio_std;
    j["mc_loss"] = r.mc_loss;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---- subcommand bodies -------------------------------------------------

int cmd_gen_kernel(const std::vector<double>& wavelengths, std::size_t patch,
                   std::size_t embed_dim, std::size_t token_dim, std::size_t depth,
                   std::size_t heads, std::uint64_t seed, const std::string& out) {
    GeneratorConfig cfg;
    cfg.base_patch = patch;
    cfg.out_dim = embed_dim;
    cfg.token_dim = token_dim;
    cfg.depth = depth;
    cfg.heads = heads;
    cfg.seed = seed;
    const WavelengthSpec spec{wavelengths};
    const DynamicKernel k = generate_kernel(init_generator(cfg), spec);

    SidecarMeta meta;
    meta.lambdas_um = spec.lambdas_um;
    meta.patch_size = static_cast<int>(patch);
    meta.provenance["role"] = "patch-embedding kernel";
    meta.provenance["source"] = "wavelength-conditioned generator, seed " +
                                std::to_string(seed);
    fkt_write(out, TensorData::from_tensor4(k.weights), &meta);

    SidecarMeta bias_meta;
    bias_meta.provenance["role"] = "patch-embedding bias";
    fkt_write(bias_path(out), TensorData::from_vector(k.bias), &bias_meta);
    std::cout << "wrote kernel [" << k.weights.dim(0) << "," << k.weights.dim(1) << ","
              << k.weights.dim(2) << "," << k.weights.dim(3) << "] to " << out
              << " and bias to " << bias_path(out) << "\n";
    return 0;
}

int cmd_resize_kernel(const std::string& in, std::size_t to, const std::string& method,
                      const std::string& out) {
    KernelFile k = read_kernel(in);
    const ResizeStrategy strategy = strategy_from_tag(method);
    const Tensor4 resized = strategy == ResizeStrategy::PI
                                ? pi_resize_kernel(k.weights, to)
                                : linear_resize_kernel(k.weights, to);
    SidecarMeta meta = k.meta;
    meta.patch_size = static_cast<int>(to);
    meta.semantics = semantics_tag(ResizeSemantics::HALF_PIXEL);
    meta.provenance["resize"] = method + " " + std::to_string(k.weights.dim(2)) + "->" +
                                std::to_string(to);
    fkt_write(out, TensorData::from_tensor4(resized), &meta);
    if (k.has_bias_file) {
        fkt_write(bias_path(out), TensorData::from_vector(k.bias));
    }
    std::cout << "wrote " << method << "-resized kernel to " << out << "\n";
    return 0;
}

int cmd_build_operator(std::size_t from, std::size_t to, const std::string& out) {
    const ResizeOperator op = build_resize_matrix(from, from, to, to);
    SidecarMeta meta;
    meta.semantics = semantics_tag(op.semantics);
    meta.provenance["role"] = "bilinear resize operator";
    meta.provenance["src"] = std::to_string(from) + "x" + std::to_string(from);
    meta.provenance["dst"] = std::to_string(to) + "x" + std::to_string(to);
    fkt_write(out, TensorData::from_mat(op.m), &meta);
    std::cout << "wrote " << op.m.rows() << "x" << op.m.cols() << " operator to " << out
              << "\n";
    return 0;
}

int cmd_tokenize(const std::string& image_path, const std::string& kernel_path,
                 const std::string& out) {
    const ImageCHW img = read_image(image_path);
    const KernelFile k = read_kernel(kernel_path);
    if (img.lambdas && k.meta.lambdas_um) {
        const auto& a = img.lambdas->lambdas_um;
        const auto& b = *k.meta.lambdas_um;
        if (a != b) {
            throw SpectralMismatchError(
                "image and kernel wavelength lists disagree (" + std::to_string(a.size()) +
                " vs " + std::to_string(b.size()) + " entries or differing values)");
        }
    }
    const TokenSequence seq = patchify(img, k.weights, k.bias);
    SidecarMeta meta;
    meta.patch_size = static_cast<int>(k.weights.dim(2));
    meta.provenance["role"] = "token sequence";
    meta.provenance["grid"] =
        std::to_string(seq.grid_h) + "x" + std::to_string(seq.grid_w);
    fkt_write(out, TensorData::from_mat(seq.tokens), &meta);
    std::cout << "wrote " << seq.tokens.rows() << " tokens of width "
              << seq.tokens.cols() << " to " << out << "\n";
    return 0;
}

int cmd_encode(const std::string& tokens_path, const std::string& config_path,
               std::uint64_t seed, const std::string& out) {
    const TensorData t = fkt_read(tokens_path);
    if (t.dims.size() != 2) {
        throw FormatError("token file must hold a rank-2 [N,D] tensor, got rank " +
                          std::to_string(t.dims.size()));
    }
    const Mat tokens = t.to_mat();

    EncoderConfig cfg;
    cfg.d = tokens.cols();
    cfg.seed = seed;
    if (!config_path.empty()) {
        const json j = load_json_file(config_path);
        try {
            if (j.contains("depth")) cfg.depth = j["depth"].get<std::size_t>();
            if (j.contains("heads")) cfg.heads = j["heads"].get<std::size_t>();
            if (j.contains("mlp_ratio")) cfg.mlp_ratio = j["mlp_ratio"].get<std::size_t>();
            if (j.contains("ln_eps")) cfg.ln_eps = j["ln_eps"].get<double>();
            if (j.contains("d")) cfg.d = j["d"].get<std::size_t>();
        } catch (const json::exception& e) {
            throw FormatError("encoder config: " + std::string(e.what()));
        }
    }
    if (cfg.d != tokens.cols()) {
        throw DimensionError("encoder config width " + std::to_string(cfg.d) +
                             " does not match token width " +
                             std::to_string(tokens.cols()));
    }
    const EncoderWeights w = init_encoder(cfg);
    const Mat feat = encoder_forward(w, tokens);
    SidecarMeta meta;
    meta.provenance["role"] = "encoded features";
    meta.provenance["encoder"] = "depth " + std::to_string(cfg.depth) + ", heads " +
                                 std::to_string(cfg.heads) + ", seed " +
                                 std::to_string(seed);
    fkt_write(out, TensorData::from_mat(feat), &meta);
    std::cout << "wrote encoded features " << feat.rows() << "x" << feat.cols() << " to "
              << out << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& json_path) {
    std::vector<std::string> names;
    if (suite.empty()) {
        names = suite_names();
    } else {
        names.push_back(suite);
    }
    json out;
    out["schema"] = kReportSchema;
    out["suites"] = json::array();
    bool all_pass = true;
    for (const std::string& name : names) {
        const SuiteResult r = run_suite(name);
        json sj;
        sj["suite"] = r.suite;
        sj["pass"] = r.pass();
        sj["checks"] = json::array();
        for (const CheckResult& c : r.checks) {
            sj["checks"].push_back(check_to_json(c));
            std::cout << (c.pass ? "pass" : "FAIL") << "  [" << r.suite << "] " << c.name
                      << "  (value " << c.value << ", limit " << c.limit << ")\n";
        }
        out["suites"].push_back(sj);
        if (!r.pass()) {
            all_pass = false;
            const CheckResult* f = r.first_failure();
            std::cerr << "suite '" << r.suite << "' violated property: " << f->name
                      << "\n";
        }
    }
    out["pass"] = all_pass;
    if (!json_path.empty()) write_json_file(json_path, out);
    return all_pass ? 0 : 1;
}

int cmd_compare(const std::string& kernel_path, std::size_t to, std::size_t trials,
                std::uint64_t seed, const std::string& json_path) {
    const KernelFile k = read_kernel(kernel_path);
    const FidelityReport pi = token_fidelity(k.weights, ResizeStrategy::PI, to, trials, seed);
    const FidelityReport lin =
        token_fidelity(k.weights, ResizeStrategy::LINEAR, to, trials, seed);
    for (const FidelityReport& r : {pi, lin}) {
        std::cout << r.strategy << ": max dot err " << r.max_dot_err << ", mean "
                  << r.mean_dot_err << ", norm ratio " << r.norm_ratio_mean << " +- "
                  << r.norm_ratio_std << ", mc loss " << r.mc_loss << "\n";
    }
    if (!json_path.empty()) {
        json j;
        j["schema"] = kReportSchema;
        j["reports"] = json::array({report_to_json(pi), report_to_json(lin)});
        write_json_file(json_path, j);
    }
    return 0;
}

int cmd_analyze(const std::string& image_path, std::size_t window, std::size_t bins,
                const std::string& prefix) {
    const ImageCHW img = read_image(image_path);
    // Channel mean gives the single plane the statistics are computed on.
    Mat plane(img.h, img.w);
    const double inv_c = 1.0 / static_cast<double>(img.c);
    for (std::size_t ch = 0; ch < img.c; ++ch)
        for (std::size_t y = 0; y < img.h; ++y)
            for (std::size_t x = 0; x < img.w; ++x)
                plane(y, x) += img.at(ch, y, x) * inv_c;

    const Mat spectrum = dft2_magnitude(plane);
    const Mat entropy = local_entropy(plane, window, bins);
    SidecarMeta smeta;
    smeta.provenance["role"] = "log-scaled centered DFT magnitude";
    fkt_write(prefix + "spectrum.fkt", TensorData::from_mat(spectrum), &smeta);
    SidecarMeta emeta;
    emeta.provenance["role"] = "local entropy map (bits)";
    emeta.provenance["window"] = std::to_string(window);
    emeta.provenance["bins"] = std::to_string(bins);
    fkt_write(prefix + "entropy.fkt", TensorData::from_mat(entropy), &emeta);

    json j;
    j["schema"] = kReportSchema;
    j["source"] = image_path;
    j["height"] = img.h;
    j["width"] = img.w;
    j["entropy_window"] = window;
    j["bins"] = bins;
    j["artifacts"] = {prefix + "spectrum.fkt", prefix + "entropy.fkt"};
    write_json_file(prefix + "meta.json", j);
    std::cout << "wrote " << prefix << "spectrum.fkt, " << prefix << "entropy.fkt, "
              << prefix << "meta.json\n";
    return 0;
}

int cmd_import_pgm(const std::string& in, const std::string& out,
                   const std::vector<double>& wavelengths, double gsd) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw IoError("cannot open '" + in + "' for reading");

    auto next_token = [&]() -> std::string {
        std::string tok;
        int ch;
        while ((ch = f.get()) != EOF) {
            if (ch == '#') { // comment runs to end of line
                while ((ch = f.get()) != EOF && ch != '\n') {
                }
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(ch));
        }
        return tok;
    };

    const std::string magic = next_token();
    if (magic != "P5") throw FormatError("'" + in + "' is not binary PGM (magic '" +
                                         magic + "', expected P5)");
    std::size_t w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stoul(next_token());
        h = std::stoul(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw FormatError("'" + in + "' has a malformed PGM header");
    }
    if (w == 0 || h == 0 || maxval <= 0 || maxval > 65535) {
        throw FormatError("'" + in + "' has unsupported PGM dimensions or maxval");
    }

    const bool wide = maxval > 255;
    const std::size_t need = w * h * (wide ? 2 : 1);
    std::string payload(need, '\0');
    f.read(payload.data(), static_cast<std::streamsize>(need));
    if (static_cast<std::size_t>(f.gcount()) != need) {
        throw CorruptionError("PGM payload is " + std::to_string(f.gcount()) +
                              " bytes, expected " + std::to_string(need));
    }

    ImageCHW img;
    img.c = 1;
    img.h = h;
    img.w = w;
    img.data.resize(h * w);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < h * w; ++i) {
        img.data[i] = wide ? static_cast<double>((p[2 * i] << 8) | p[2 * i + 1])
                           : static_cast<double>(p[i]);
    }

    SidecarMeta meta;
    if (!wavelengths.empty()) {
        if (wavelengths.size() != 1) {
            throw SpectralMismatchError("PGM images have one channel; got " +
                                        std::to_string(wavelengths.size()) +
                                        " wavelengths");
        }
        meta.lambdas_um = wavelengths;
    }
    if (gsd > 0.0) meta.gsd_m = gsd;
    meta.provenance["role"] = "image";
    meta.provenance["source"] = in;

    TensorData t;
    t.dims = {1, static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)};
    t.data = img.data;
    fkt_write(out, t, &meta);
    std::cout << "imported " << w << "x" << h << " PGM (maxval " << maxval << ") to "
              << out << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"resolution-adaptive patch-embedding toolkit"};
    app.require_subcommand(1);

    // gen-kernel
    auto* gen = app.add_subcommand("gen-kernel",
                                   "generate a wavelength-conditioned patch kernel");
    std::vector<double> gen_wl;
    std::size_t gen_patch = 16, gen_embed = 64, gen_token = 128, gen_depth = 2,
                gen_heads = 4;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--wavelengths", gen_wl, "central wavelengths, micrometres")
        ->required()
        ->delimiter(',');
    gen->add_option("--patch", gen_patch, "patch size P");
    gen->add_option("--embed-dim", gen_embed, "output embedding dim");
    gen->add_option("--token-dim", gen_token, "generator token width");
    gen->add_option("--depth", gen_depth, "generator transformer depth");
    gen->add_option("--heads", gen_heads, "generator attention heads");
    gen->add_option("--seed", gen_seed, "weight seed");
    gen->add_option("--out", gen_out, "output kernel path")->required();

    // resize-kernel
    auto* rk = app.add_subcommand("resize-kernel", "resize a patch kernel");
    std::string rk_in, rk_method = "pi", rk_out;
    std::size_t rk_to = 0;
    rk->add_option("--in", rk_in, "input kernel")->required();
    rk->add_option("--to", rk_to, "target patch size")->required();
    rk->add_option("--method", rk_method, "pi | linear")
        ->check(CLI::IsMember({"pi", "linear"}));
    rk->add_option("--out", rk_out, "output kernel path")->required();

    // build-operator
    auto* bo = app.add_subcommand("build-operator", "write a bilinear resize operator");
    std::size_t bo_from = 0, bo_to = 0;
    std::string bo_out;
    bo->add_option("--from", bo_from, "source side")->required();
    bo->add_option("--to", bo_to, "target side")->required();
    bo->add_option("--out", bo_out, "output path")->required();

    // tokenize
    auto* tok = app.add_subcommand("tokenize", "patchify an image into tokens");
    std::string tok_img, tok_kernel, tok_out;
    tok->add_option("--image", tok_img, "image tensor [C,H,W]")->required();
    tok->add_option("--kernel", tok_kernel, "kernel tensor [D,C,P,P]")->required();
    tok->add_option("--out", tok_out, "output token path")->required();

    // encode
    auto* enc = app.add_subcommand("encode", "run tokens through the encoder");
    std::string enc_tokens, enc_config, enc_out;
    std::uint64_t enc_seed = 0;
    enc->add_option("--tokens", enc_tokens, "token tensor [N,D]")->required();
    enc->add_option("--config", enc_config, "encoder config JSON");
    enc->add_option("--seed", enc_seed, "encoder weight seed");
    enc->add_option("--out", enc_out, "output feature path")->required();

    // verify
    auto* ver = app.add_subcommand("verify", "run the invariant suites");
    std::string ver_suite, ver_json;
    ver->add_option("--suite", ver_suite, "pinv | recovery | equivariance | tokens")
        ->check(CLI::IsMember({"pinv", "recovery", "equivariance", "tokens"}));
    ver->add_option("--json", ver_json, "write a JSON report here");

    // compare
    auto* cmp = app.add_subcommand("compare",
                                   "fidelity report for pi vs linear kernel resize");
    std::string cmp_kernel, cmp_json;
    std::size_t cmp_to = 0, cmp_trials = 1000;
    std::uint64_t cmp_seed = 7;
    cmp->add_option("--kernel", cmp_kernel, "kernel tensor")->required();
    cmp->add_option("--to", cmp_to, "target patch size")->required();
    cmp->add_option("--trials", cmp_trials, "Monte Carlo trials");
    cmp->add_option("--seed", cmp_seed, "trial seed");
    cmp->add_option("--json", cmp_json, "write a JSON report here");

    // analyze
    auto* an = app.add_subcommand("analyze", "image spectrum and entropy artifacts");
    std::string an_img, an_prefix;
    std::size_t an_window = 9, an_bins = 64;
    an->add_option("--image", an_img, "image tensor [C,H,W]")->required();
    an->add_option("--entropy-window", an_window, "odd window size");
    an->add_option("--bins", an_bins, "histogram bins");
    an->add_option("--out-prefix", an_prefix, "artifact filename prefix")->required();

    // import-pgm
    auto* pgm = app.add_subcommand("import-pgm", "convert binary PGM (P5) to tensor");
    std::string pgm_in, pgm_out;
    std::vector<double> pgm_wl;
    double pgm_gsd = 0.0;
    pgm->add_option("--in", pgm_in, "input .pgm")->required();
    pgm->add_option("--out", pgm_out, "output tensor path")->required();
    pgm->add_option("--wavelengths", pgm_wl, "central wavelength, micrometres")
        ->delimiter(',');
    pgm->add_option("--gsd", pgm_gsd, "ground sample distance, metres/pixel");

    std::vector<const char*> argv;
    argv.push_back("fleximo");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_kernel(gen_wl, gen_patch, gen_embed, gen_token, gen_depth,
                                  gen_heads, gen_seed, gen_out);
        if (rk->parsed()) return cmd_resize_kernel(rk_in, rk_to, rk_method, rk_out);
        if (bo->parsed()) return cmd_build_operator(bo_from, bo_to, bo_out);
        if (tok->parsed()) return cmd_tokenize(tok_img, tok_kernel, tok_out);
        if (enc->parsed()) return cmd_encode(enc_tokens, enc_config, enc_seed, enc_out);
        if (ver->parsed()) return cmd_verify(ver_suite, ver_json);
        if (cmp->parsed())
            return cmd_compare(cmp_kernel, cmp_to, cmp_trials, cmp_seed, cmp_json);
        if (an->parsed()) return cmd_analyze(an_img, an_window, an_bins, an_prefix);
        if (pgm->parsed()) return cmd_import_pgm(pgm_in, pgm_out, pgm_wl, pgm_gsd);
        std::cerr << "no subcommand given; run with --help for usage\n";
        return 2;
    } catch (const Error& e) {
        nlohmann::json j;
        j["error"]["class"] = e.kind();
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"]["class"] = "internal";
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
}

} // namespace fleximo::cli

// catp — cross-attention token pruning toolkit.
//
// Subcommands: gen-fixture, importance, prune, compare, sweep, validate.
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O or
// format error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "catp/attnio.hpp"
#include "catp/baselines.hpp"
#include "catp/report.hpp"
#include "catp/selection.hpp"
#include "catp/toymodel.hpp"
#include "catp/voting.hpp"

namespace {

using namespace catp;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Mistakes in how the tool is invoked, as opposed to bad input files.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::LayerOutOfRange:
    case ErrorCode::WeightLengthMismatch:
    case ErrorCode::EmptyColumn:
    case ErrorCode::RatioOutOfRange:
    case ErrorCode::KOutOfRange:
    case ErrorCode::BadReport:
        return kExitUsage;
    default:
        return kExitIo;
    }
}

// Lazily loaded tensor inputs shared by the method dispatcher.
struct Inputs {
    std::string cross_path;
    std::string self_path;
    std::string emb_path;

    std::optional<AttnTensor> cross;
    std::optional<SelfAttnTensor> self;
    std::optional<EmbeddingMatrix> emb;

    const AttnTensor& cross_tensor() {
        if (!cross) {
            if (cross_path.empty()) throw UsageError("this method needs a cross-attention input");
            cross = read_cross_attention(cross_path);
        }
        return *cross;
    }
    const SelfAttnTensor& self_tensor() {
        if (!self) {
            if (self_path.empty()) throw UsageError("this method needs a self-attention input");
            self = read_self_attention(self_path);
        }
        return *self;
    }
    const EmbeddingMatrix& emb_tensor() {
        if (!emb) {
            if (emb_path.empty()) throw UsageError("this method needs an embeddings input");
            emb = read_embeddings(emb_path);
        }
        return *emb;
    }
};

// A method token: catp | catp-weighted | l2 | selfattn, optionally
// suffixed with @<layer selection>, e.g. catp@first, selfattn@single:0.
struct MethodSpec {
    std::string name;
    LayerSelection layers = LayerSelection::all();

    static MethodSpec parse(const std::string& token) {
        MethodSpec spec;
        std::size_t at = token.find('@');
        spec.name = token.substr(0, at);
        if (at != std::string::npos) spec.layers = LayerSelection::parse(token.substr(at + 1));
        if (spec.name != "catp" && spec.name != "catp-weighted" && spec.name != "l2" &&
            spec.name != "selfattn")
            throw UsageError("unknown method '" + spec.name +
                             "' (want catp|catp-weighted|l2|selfattn)");
        return spec;
    }

    std::string label() const {
        if (name == "l2") return name;
        return name + "@" + layers.describe();
    }

    ImportanceVector run(Inputs& in) const {
        if (name == "catp") return importance(in.cross_tensor(), layers);
        if (name == "catp-weighted") {
            ImageWeights w = image_weights_from_self_attention(in.self_tensor());
            return importance(in.cross_tensor(), layers, w);
        }
        if (name == "l2") return l2_importance(in.emb_tensor());
        return selfattn_importance(in.self_tensor(), layers);
    }
};

// --strict: refuse attention inputs whose rows have drifted off sum 1.
int strict_check(const AttnTensor& t, const std::string& path) {
    auto bad = validate_normalization(t, 1e-4);
    if (bad.empty()) return kExitOk;
    std::cerr << path << ": " << bad.size() << " rows fail normalization at tol 1e-4\n";
    return kExitValidation;
}

int strict_check(const SelfAttnTensor& t, const std::string& path) {
    auto bad = validate_normalization(t, 1e-4);
    if (bad.empty()) return kExitOk;
    std::cerr << path << ": " << bad.size() << " rows fail normalization at tol 1e-4\n";
    return kExitValidation;
}

struct GenFixtureArgs {
    ToyConfig cfg;
    std::string out_dir = ".";
};

int run_gen_fixture(const GenFixtureArgs& args) {
    ToyFixture fixture = generate(args.cfg);
    std::filesystem::path dir(args.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    std::filesystem::path cross_path = dir / "cross.attn";
    std::filesystem::path self_path = dir / "self.attn";
    std::filesystem::path emb_path = dir / "emb.attn";
    write_tensor(fixture.cross, cross_path);
    write_tensor(fixture.self, self_path);
    write_tensor(fixture.emb, emb_path);
    std::string out;
    out += "cross = " + cross_path.string() + '\n';
    out += "self = " + self_path.string() + '\n';
    out += "emb = " + emb_path.string() + '\n';
    std::cout << out << std::flush;
    return kExitOk;
}

struct ScoreArgs {
    std::string input;
    std::string method = "catp";
    std::string layers = "all";
    bool weighted = false;
    std::string weights_input;
    std::optional<double> ratio; // set by `prune`, absent for `importance`
    bool strict = false;
};

int run_score(const ScoreArgs& args) {
    if (args.method.find('@') != std::string::npos)
        throw UsageError("pass the layer selection via --layers, not inside --method");
    MethodSpec spec = MethodSpec::parse(args.method);
    spec.layers = LayerSelection::parse(args.layers);
    bool weighted = args.weighted || spec.name == "catp-weighted";
    if (args.weighted && !(spec.name == "catp" || spec.name == "catp-weighted"))
        throw UsageError("--weighted only applies to the catp method");
    if (weighted) spec.name = "catp-weighted";
    if (weighted && args.weights_input.empty())
        throw UsageError("weighted voting needs --weights-input (a self-attention file)");
    if (!weighted && !args.weights_input.empty())
        throw UsageError("--weights-input only makes sense with weighted voting");

    Inputs in;
    // The sole --input goes to whichever slot the method reads.
    if (spec.name == "l2") {
        in.emb_path = args.input;
    } else if (spec.name == "selfattn") {
        in.self_path = args.input;
    } else {
        in.cross_path = args.input;
        in.self_path = args.weights_input;
    }

    if (args.strict) {
        if (spec.name == "catp" || spec.name == "catp-weighted") {
            if (int rc = strict_check(in.cross_tensor(), in.cross_path)) return rc;
        }
        if (spec.name == "selfattn" || spec.name == "catp-weighted") {
            if (int rc = strict_check(in.self_tensor(), in.self_path)) return rc;
        }
    }

    ImportanceVector imp = spec.run(in);

    Report report;
    report.method = args.method;
    report.layers = spec.name == "l2" ? "" : spec.layers.describe();
    report.weighted = weighted;
    report.input = args.input;
    report.weights_input = args.weights_input;
    report.importance = imp;
    if (args.ratio) {
        PruneDecision decision = prune(imp, *args.ratio);
        report.ratio = *args.ratio;
        report.kept = decision.kept;
        report.pruned = decision.pruned;
    }
    std::cout << serialize(report) << std::flush;
    return kExitOk;
}

struct CompareArgs {
    std::string cross_path;
    std::string self_path;
    std::string emb_path;
    std::vector<std::string> methods;
    double ratio = 0.0;
    bool strict = false;
};

ComparisonReport build_comparison(Inputs& in, const std::vector<MethodSpec>& specs, double ratio,
                                  std::size_t reference) {
    ComparisonReport report;
    report.input_cross = in.cross_path;
    report.input_self = in.self_path;
    report.input_emb = in.emb_path;
    report.ratio = ratio;
    report.reference = reference;

    std::vector<ImportanceVector> scores;
    for (const MethodSpec& spec : specs) {
        scores.push_back(spec.run(in));
        if (scores.back().size() != scores.front().size())
            throw UsageError("method " + spec.label() + " scores " +
                             std::to_string(scores.back().size()) + " tokens, " +
                             specs.front().label() + " scores " +
                             std::to_string(scores.front().size()));
    }
    report.n_tokens = scores.front().size();

    const ImportanceVector& ref = scores[reference];
    for (std::size_t i = 0; i < specs.size(); ++i) {
        PruneDecision decision = prune(scores[i], ratio);
        ComparisonEntry entry;
        entry.label = specs[i].label();
        entry.kept = decision.kept;
        entry.retained_mass = retained_mass(entry.kept, ref);
        report.entries.push_back(std::move(entry));
    }
    report.jaccard.assign(specs.size(), std::vector<double>(specs.size(), 0.0));
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = 0; j < specs.size(); ++j) {
            report.jaccard[i][j] = jaccard_index(report.entries[i].kept, report.entries[j].kept);
        }
    }
    return report;
}

int run_compare(const CompareArgs& args) {
    if (args.methods.empty()) throw UsageError("--methods must list at least one method");
    std::vector<MethodSpec> specs;
    for (const std::string& token : args.methods) specs.push_back(MethodSpec::parse(token));

    Inputs in;
    in.cross_path = args.cross_path;
    in.self_path = args.self_path;
    in.emb_path = args.emb_path;

    if (args.strict) {
        for (const MethodSpec& spec : specs) {
            if (spec.name == "catp" || spec.name == "catp-weighted") {
                if (int rc = strict_check(in.cross_tensor(), in.cross_path)) return rc;
            }
            if (spec.name == "selfattn" || spec.name == "catp-weighted") {
                if (int rc = strict_check(in.self_tensor(), in.self_path)) return rc;
            }
        }
    }

    // Retained mass is measured against the first listed method's scores.
    ComparisonReport report = build_comparison(in, specs, args.ratio, 0);
    std::cout << serialize(report) << std::flush;
    return kExitOk;
}

struct SweepArgs {
    std::string input;
    double ratio = 0.0;
    bool strict = false;
};

int run_sweep(const SweepArgs& args) {
    Inputs in;
    in.cross_path = args.input;
    const AttnTensor& cross = in.cross_tensor();
    if (args.strict) {
        if (int rc = strict_check(cross, args.input)) return rc;
    }

    // One entry per single layer, then the all-layers reference last.
    std::vector<MethodSpec> specs;
    for (std::size_t l = 0; l < cross.layers(); ++l)
        specs.push_back(MethodSpec{"catp", LayerSelection::single(l)});
    specs.push_back(MethodSpec{"catp", LayerSelection::all()});

    ComparisonReport report = build_comparison(in, specs, args.ratio, specs.size() - 1);
    std::cout << serialize(report) << std::flush;
    return kExitOk;
}

struct ValidateArgs {
    std::string input;
    double tol = 1e-4;
};

int run_validate(const ValidateArgs& args) {
    if (!(args.tol > 0.0)) throw UsageError("--tol must be > 0");
    AnyTensor any = read_tensor(args.input);
    std::vector<RowId> bad;
    if (const auto* cross = std::get_if<AttnTensor>(&any)) {
        bad = validate_normalization(*cross, args.tol);
    } else if (const auto* self = std::get_if<SelfAttnTensor>(&any)) {
        bad = validate_normalization(*self, args.tol);
    } else {
        throw UsageError("embeddings carry no normalization to validate");
    }
    std::string out = "violations = " + std::to_string(bad.size()) + '\n';
    for (const RowId& row : bad) {
        out += std::to_string(row.layer) + ' ' + std::to_string(row.head) + ' ' +
               std::to_string(row.row) + '\n';
    }
    std::cout << out << std::flush;
    return bad.empty() ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-attention token pruning toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GenFixtureArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-fixture", "write a deterministic toy fixture");
    gen_cmd->add_option("--seed", gen.cfg.seed, "generator seed");
    gen_cmd->add_option("--layers", gen.cfg.layers, "attention layers")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--heads", gen.cfg.heads, "attention heads")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--queries", gen.cfg.n_query, "query tokens")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--images", gen.cfg.n_image, "image tokens")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--dim", gen.cfg.dim, "embedding dimension")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--temperature", gen.cfg.temperature, "softmax temperature");
    gen_cmd->add_option("--out", gen.out_dir, "output directory");

    ScoreArgs imp_args;
    CLI::App* imp_cmd = app.add_subcommand("importance", "score tokens without pruning");
    imp_cmd->add_option("--input", imp_args.input, "tensor file")->required();
    imp_cmd->add_option("--method", imp_args.method, "catp|l2|selfattn")->required();
    imp_cmd->add_option("--layers", imp_args.layers, "all|first|single:K|subset:A,B,...");
    imp_cmd->add_flag("--weighted", imp_args.weighted, "weight votes by image-token importance");
    imp_cmd->add_option("--weights-input", imp_args.weights_input,
                        "self-attention file the weights come from");
    imp_cmd->add_flag("--strict", imp_args.strict, "reject unnormalized inputs (tol 1e-4)");

    ScoreArgs prune_args;
    double prune_ratio = 0.0;
    CLI::App* prune_cmd = app.add_subcommand("prune", "score tokens and emit a prune decision");
    prune_cmd->add_option("--input", prune_args.input, "tensor file")->required();
    prune_cmd->add_option("--method", prune_args.method, "catp|l2|selfattn")->required();
    prune_cmd->add_option("--layers", prune_args.layers, "all|first|single:K|subset:A,B,...");
    prune_cmd->add_flag("--weighted", prune_args.weighted,
                        "weight votes by image-token importance");
    prune_cmd->add_option("--weights-input", prune_args.weights_input,
                          "self-attention file the weights come from");
    prune_cmd->add_option("--ratio", prune_ratio, "fraction of tokens to prune")->required();
    prune_cmd->add_flag("--strict", prune_args.strict, "reject unnormalized inputs (tol 1e-4)");

    CompareArgs cmp;
    CLI::App* cmp_cmd = app.add_subcommand("compare", "contrast several methods' kept sets");
    cmp_cmd->add_option("--cross", cmp.cross_path, "cross-attention file");
    cmp_cmd->add_option("--self", cmp.self_path, "self-attention file");
    cmp_cmd->add_option("--emb", cmp.emb_path, "embeddings file");
    cmp_cmd->add_option("--methods", cmp.methods, "method tokens, e.g. catp@first,l2")
        ->required()
        ->delimiter(',');
    cmp_cmd->add_option("--ratio", cmp.ratio, "fraction of tokens to prune")->required();
    cmp_cmd->add_flag("--strict", cmp.strict, "reject unnormalized inputs (tol 1e-4)");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "per-layer kept-set analysis");
    sweep_cmd->add_option("--input", sweep.input, "cross-attention file")->required();
    sweep_cmd->add_option("--ratio", sweep.ratio, "fraction of tokens to prune")->required();
    sweep_cmd->add_flag("--strict", sweep.strict, "reject unnormalized inputs (tol 1e-4)");

    ValidateArgs val;
    CLI::App* val_cmd = app.add_subcommand("validate", "check row normalization");
    val_cmd->add_option("--input", val.input, "tensor file")->required();
    val_cmd->add_option("--tol", val.tol, "allowed |row sum - 1|");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) return run_gen_fixture(gen);
        if (imp_cmd->parsed()) return run_score(imp_args);
        if (prune_cmd->parsed()) {
            prune_args.ratio = prune_ratio;
            return run_score(prune_args);
        }
        if (cmp_cmd->parsed()) return run_compare(cmp);
        if (sweep_cmd->parsed()) return run_sweep(sweep);
        if (val_cmd->parsed()) return run_validate(val);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

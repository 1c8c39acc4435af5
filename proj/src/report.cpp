#include "catp/report.hpp"

#include <charconv>
#include <sstream>
#include <system_error>

#include "catp/error.hpp"

namespace catp {

namespace {

constexpr const char* kReportMagic = "catp-report/1";
constexpr const char* kCompareMagic = "catp-compare/1";

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }
std::string from_dash(const std::string& s) { return s == "-" ? "" : s; }

std::string format_ids(std::span<const std::size_t> ids) {
    if (ids.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(ids[i]);
    }
    return out;
}

std::string format_doubles(std::span<const double> values) {
    if (values.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

// Strict line-oriented reader: every line must match the documented key
// order exactly.
class LineReader {
public:
    explicit LineReader(const std::string& text) : stream_(text) {}

    std::string expect_line() {
        std::string line;
        if (!std::getline(stream_, line)) raise(ErrorCode::BadReport, "unexpected end of report");
        return line;
    }

    void expect_literal(const std::string& want) {
        std::string line = expect_line();
        if (line != want)
            raise(ErrorCode::BadReport, "expected '" + want + "', got '" + line + "'");
    }

    std::string expect_value(const std::string& key) {
        std::string line = expect_line();
        std::string prefix = key + " = ";
        if (line.rfind(prefix, 0) != 0)
            raise(ErrorCode::BadReport, "expected key '" + key + "', got '" + line + "'");
        return line.substr(prefix.size());
    }

    void expect_end() {
        expect_literal("end");
        std::string extra;
        if (std::getline(stream_, extra))
            raise(ErrorCode::BadReport, "trailing content after 'end'");
    }

private:
    std::istringstream stream_;
};

double parse_one_double(const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        raise(ErrorCode::BadReport, "bad number '" + text + "'");
    return v;
}

std::size_t parse_one_size(const std::string& text) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        raise(ErrorCode::BadReport, "bad count '" + text + "'");
    return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse&& parse_one) {
    std::vector<T> out;
    if (text == "-") return out;
    std::istringstream stream(text);
    std::string token;
    while (stream >> token) out.push_back(parse_one(token));
    if (out.empty()) raise(ErrorCode::BadReport, "empty list field");
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) raise(ErrorCode::BadReport, "cannot format number");
    return std::string(buf, ptr);
}

std::string serialize(const Report& r) {
    std::string out;
    out += kReportMagic;
    out += '\n';
    out += "version = " + or_dash(r.tool_version) + '\n';
    out += "method = " + or_dash(r.method) + '\n';
    out += "layers = " + or_dash(r.layers) + '\n';
    out += std::string("weighted = ") + (r.weighted ? "1" : "0") + '\n';
    out += "input = " + or_dash(r.input) + '\n';
    out += "weights_input = " + or_dash(r.weights_input) + '\n';
    out += "seed = " + or_dash(r.seed) + '\n';
    out += "ratio = " + (r.ratio ? format_double(*r.ratio) : std::string("-")) + '\n';
    out += "n_query = " + std::to_string(r.importance.size()) + '\n';
    out += "importance = " + format_doubles(r.importance) + '\n';
    out += "kept = " + format_ids(r.kept) + '\n';
    out += "pruned = " + format_ids(r.pruned) + '\n';
    out += "end\n";
    return out;
}

Report parse_report(const std::string& text) {
    LineReader in(text);
    in.expect_literal(kReportMagic);
    Report r;
    r.tool_version = from_dash(in.expect_value("version"));
    r.method = from_dash(in.expect_value("method"));
    r.layers = from_dash(in.expect_value("layers"));
    std::string weighted = in.expect_value("weighted");
    if (weighted != "0" && weighted != "1")
        raise(ErrorCode::BadReport, "weighted must be 0 or 1");
    r.weighted = weighted == "1";
    r.input = from_dash(in.expect_value("input"));
    r.weights_input = from_dash(in.expect_value("weights_input"));
    r.seed = from_dash(in.expect_value("seed"));
    std::string ratio = in.expect_value("ratio");
    if (ratio != "-") r.ratio = parse_one_double(ratio);
    std::size_t n_query = parse_one_size(in.expect_value("n_query"));
    r.importance = parse_list<double>(in.expect_value("importance"),
                                      [](const std::string& t) { return parse_one_double(t); });
    if (r.importance.size() != n_query)
        raise(ErrorCode::BadReport, "importance length disagrees with n_query");
    r.kept = parse_list<std::size_t>(in.expect_value("kept"),
                                     [](const std::string& t) { return parse_one_size(t); });
    r.pruned = parse_list<std::size_t>(in.expect_value("pruned"),
                                       [](const std::string& t) { return parse_one_size(t); });
    in.expect_end();
    return r;
}

std::string serialize(const ComparisonReport& r) {
    std::string out;
    out += kCompareMagic;
    out += '\n';
    out += "version = " + or_dash(r.tool_version) + '\n';
    out += "input cross = " + or_dash(r.input_cross) + '\n';
    out += "input self = " + or_dash(r.input_self) + '\n';
    out += "input emb = " + or_dash(r.input_emb) + '\n';
    out += "ratio = " + format_double(r.ratio) + '\n';
    out += "n_tokens = " + std::to_string(r.n_tokens) + '\n';
    out += "reference = " + std::to_string(r.reference) + '\n';
    out += "methods =";
    for (const ComparisonEntry& e : r.entries) out += " " + e.label;
    out += '\n';
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        out += "kept " + std::to_string(i) + " = " + format_ids(r.entries[i].kept) + '\n';
        out += "retained_mass " + std::to_string(i) + " = " +
               format_double(r.entries[i].retained_mass) + '\n';
    }
    for (std::size_t i = 0; i < r.jaccard.size(); ++i) {
        out += "jaccard " + std::to_string(i) + " = " + format_doubles(r.jaccard[i]) + '\n';
    }
    out += "end\n";
    return out;
}

ComparisonReport parse_comparison(const std::string& text) {
    LineReader in(text);
    in.expect_literal(kCompareMagic);
    ComparisonReport r;
    r.tool_version = from_dash(in.expect_value("version"));
    r.input_cross = from_dash(in.expect_value("input cross"));
    r.input_self = from_dash(in.expect_value("input self"));
    r.input_emb = from_dash(in.expect_value("input emb"));
    r.ratio = parse_one_double(in.expect_value("ratio"));
    r.n_tokens = parse_one_size(in.expect_value("n_tokens"));
    r.reference = parse_one_size(in.expect_value("reference"));
    std::string methods = in.expect_value("methods");
    std::istringstream method_stream(methods);
    std::string label;
    while (method_stream >> label) r.entries.push_back(ComparisonEntry{label, {}, 0.0});
    if (r.entries.empty()) raise(ErrorCode::BadReport, "comparison lists no methods");
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        r.entries[i].kept =
            parse_list<std::size_t>(in.expect_value("kept " + std::to_string(i)),
                                    [](const std::string& t) { return parse_one_size(t); });
        r.entries[i].retained_mass =
            parse_one_double(in.expect_value("retained_mass " + std::to_string(i)));
    }
    r.jaccard.resize(r.entries.size());
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        r.jaccard[i] = parse_list<double>(in.expect_value("jaccard " + std::to_string(i)),
                                          [](const std::string& t) { return parse_one_double(t); });
        if (r.jaccard[i].size() != r.entries.size())
            raise(ErrorCode::BadReport, "jaccard row has wrong length");
    }
    in.expect_end();
    return r;
}

double jaccard_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::size_t i = 0, j = 0, both = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++both, ++i, ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t either = a.size() + b.size() - both;
    if (either == 0) return 1.0; // two empty sets are identical
    return static_cast<double>(both) / static_cast<double>(either);
}

double retained_mass(std::span<const std::size_t> kept, const ImportanceVector& reference) {
    double total = 0.0;
    for (double v : reference) total += v;
    if (total <= 0.0) return 0.0;
    double inside = 0.0;
    for (std::size_t id : kept) inside += reference[id];
    return inside / total;
}

} // namespace catp

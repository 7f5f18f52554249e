// Function extraction and normalization for a C-family subset. Parsing is a
// lightweight lexer plus brace matcher: we only need line granularity, not
// full semantics.

#include "vmc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace vmc {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

enum class Region : uint8_t { code, line_comment, block_comment, string_lit, char_lit };

// Classifies every byte of the source so later passes can ignore comments
// and the insides of literals.
std::vector<Region> classify_regions(const std::string& text) {
    std::vector<Region> out(text.size(), Region::code);
    Region st = Region::code;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        char next = i + 1 < text.size() ? text[i + 1] : '\0';
        switch (st) {
        case Region::code:
            if (c == '/' && next == '/') {
                st = Region::line_comment;
                out[i] = st;
            } else if (c == '/' && next == '*') {
                st = Region::block_comment;
                out[i] = st;
            } else if (c == '"') {
                st = Region::string_lit;
                out[i] = st;
            } else if (c == '\'') {
                st = Region::char_lit;
                out[i] = st;
            }
            break;
        case Region::line_comment:
            out[i] = (c == '\n') ? Region::code : st;
            if (c == '\n') st = Region::code;
            break;
        case Region::block_comment:
            out[i] = st;
            if (c == '*' && next == '/') {
                out[i + 1] = st;
                ++i;
                st = Region::code;
            }
            break;
        case Region::string_lit:
        case Region::char_lit: {
            out[i] = st;
            char quote = st == Region::string_lit ? '"' : '\'';
            if (c == '\\' && i + 1 < text.size()) {
                out[i + 1] = st;
                ++i;
            } else if (c == quote) {
                st = Region::code;
            }
            break;
        }
        }
    }
    return out;
}

struct Token {
    std::string text;
    size_t pos;
};

// Code-region tokens: identifiers, numbers and single punctuation chars.
std::vector<Token> lex_code_tokens(const std::string& text, const std::vector<Region>& regions) {
    std::vector<Token> toks;
    size_t i = 0;
    while (i < text.size()) {
        if (regions[i] != Region::code) {
            ++i;
            continue;
        }
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            size_t j = i;
            while (j < text.size() && regions[j] == Region::code && is_ident_char(text[j])) ++j;
            toks.push_back({text.substr(i, j - i), i});
            i = j;
        } else {
            toks.push_back({std::string(1, c), i});
            ++i;
        }
    }
    return toks;
}

void check_braces(const std::string& text, const std::vector<Region>& regions) {
    long depth = 0;
    size_t last_open = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (regions[i] != Region::code) continue;
        if (text[i] == '{') {
            ++depth;
            last_open = i;
        } else if (text[i] == '}') {
            --depth;
            if (depth < 0) throw UnbalancedBraces(i, "unexpected '}' at byte " + std::to_string(i));
        }
    }
    if (depth != 0)
        throw UnbalancedBraces(last_open,
                               "unclosed '{' at byte " + std::to_string(last_open));
}

const std::set<std::string>& control_keywords() {
    static const std::set<std::string> kw = {"if",     "else",  "for",    "while", "do",
                                             "switch", "case",  "return", "break", "continue",
                                             "goto",   "sizeof"};
    return kw;
}

const std::set<std::string>& type_keywords() {
    static const std::set<std::string> kw = {
        "void",     "int",      "char",     "short",    "long",    "unsigned", "signed",
        "float",    "double",   "bool",     "size_t",   "ssize_t", "int8_t",   "int16_t",
        "int32_t",  "int64_t",  "uint8_t",  "uint16_t", "uint32_t", "uint64_t", "struct",
        "union",    "enum",     "const",    "static",   "register", "volatile", "extern",
        "inline",   "auto",     "restrict", "FILE"};
    return kw;
}

struct RawFunction {
    std::string name;
    size_t begin; // byte span, [begin, end)
    size_t end;
};

std::vector<RawFunction> scan_functions(const std::string& text) {
    auto regions = classify_regions(text);
    check_braces(text, regions);
    auto toks = lex_code_tokens(text, regions);

    std::vector<RawFunction> out;
    long depth = 0;
    size_t t = 0;
    // Statement boundary: position right after the previous top-level ';',
    // '{', '}' or preprocessor line. Signatures start at the first token
    // after it.
    size_t stmt_start_tok = 0;

    auto is_preprocessor_tok = [&](size_t idx) {
        if (toks[idx].text != "#") return false;
        // '#' opens a preprocessor line only at the start of a line
        size_t p = toks[idx].pos;
        while (p > 0 && (text[p - 1] == ' ' || text[p - 1] == '\t')) --p;
        return p == 0 || text[p - 1] == '\n';
    };

    while (t < toks.size()) {
        const Token& tok = toks[t];
        if (depth == 0 && is_preprocessor_tok(t)) {
            // skip to end of the physical line
            size_t eol = text.find('\n', tok.pos);
            if (eol == std::string::npos) eol = text.size();
            while (t < toks.size() && toks[t].pos < eol) ++t;
            stmt_start_tok = t;
            continue;
        }
        if (tok.text == "{") {
            ++depth;
            ++t;
            if (depth == 1) stmt_start_tok = t;
            continue;
        }
        if (tok.text == "}") {
            --depth;
            ++t;
            if (depth == 0) stmt_start_tok = t;
            continue;
        }
        if (tok.text == ";" && depth == 0) {
            ++t;
            stmt_start_tok = t;
            continue;
        }
        if (depth == 0 && tok.text == "(" && t > 0 && is_ident_start(toks[t - 1].text[0]) &&
            !control_keywords().count(toks[t - 1].text)) {
            // candidate: identifier '(' ... ')' [qualifiers] '{'
            size_t name_tok = t - 1;
            long pdepth = 1;
            size_t j = t + 1;
            while (j < toks.size() && pdepth > 0) {
                if (toks[j].text == "(") ++pdepth;
                else if (toks[j].text == ")") --pdepth;
                ++j;
            }
            // allow trailing qualifier words between ')' and '{'
            size_t q = j;
            while (q < toks.size() && is_ident_start(toks[q].text[0])) ++q;
            if (pdepth == 0 && q < toks.size() && toks[q].text == "{") {
                size_t sig_begin = toks[stmt_start_tok].pos;
                // find matching close brace
                long bdepth = 0;
                size_t b = q;
                size_t end_pos = text.size();
                while (b < toks.size()) {
                    if (toks[b].text == "{") ++bdepth;
                    else if (toks[b].text == "}") {
                        --bdepth;
                        if (bdepth == 0) {
                            end_pos = toks[b].pos + 1;
                            break;
                        }
                    }
                    ++b;
                }
                out.push_back({toks[name_tok].text, sig_begin, end_pos});
                t = b + 1;
                stmt_start_tok = t;
                continue;
            }
        }
        ++t;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string strip_trailing_ws(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
}

// Collects parameter names from the signature and declared locals from the
// body, in declaration order.
std::vector<std::string> collect_locals(const std::vector<Token>& toks) {
    std::vector<std::string> decls;
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (!seen.count(name)) {
            seen.insert(name);
            decls.push_back(name);
        }
    };

    // Parameters: tokens inside the first top-level (...) before the body.
    size_t i = 0;
    while (i < toks.size() && toks[i].text != "(") ++i;
    if (i < toks.size()) {
        long pdepth = 1;
        size_t j = i + 1;
        std::vector<std::string> param;
        auto flush_param = [&] {
            // last identifier of the chunk that is not a type keyword and
            // not a struct/union/enum tag
            for (size_t k = param.size(); k > 0; --k) {
                const std::string& w = param[k - 1];
                if (!is_ident_start(w[0])) continue;
                if (type_keywords().count(w)) break;
                bool tag = k >= 2 && (param[k - 2] == "struct" || param[k - 2] == "union" ||
                                      param[k - 2] == "enum");
                if (tag) continue;
                add(w);
                break;
            }
            param.clear();
        };
        while (j < toks.size() && pdepth > 0) {
            const std::string& w = toks[j].text;
            if (w == "(") ++pdepth;
            else if (w == ")") {
                --pdepth;
                if (pdepth == 0) {
                    flush_param();
                    break;
                }
            } else if (w == "," && pdepth == 1) {
                flush_param();
            } else if (w == "[") {
                // array suffix: stop collecting this chunk's identifiers
                flush_param();
                while (j < toks.size() && toks[j].text != "]") ++j;
            } else {
                param.push_back(w);
            }
            ++j;
        }
        i = j;
    }

    // Locals: statements (or for-init clauses) starting with a type keyword.
    // Declarators are identifiers optionally preceded by '*' and separated
    // by ','; initializers are skipped to the next ',' or ';' at depth 0.
    for (size_t s = i; s < toks.size(); ++s) {
        const std::string& w = toks[s].text;
        bool stmt_head = s == 0 || toks[s - 1].text == ";" || toks[s - 1].text == "{" ||
                         toks[s - 1].text == "}" || toks[s - 1].text == "(";
        bool for_init = s >= 2 && toks[s - 1].text == "(" && toks[s - 2].text == "for";
        if (!(stmt_head || for_init)) continue;
        if (!type_keywords().count(w)) continue;
        // consume type prefix
        size_t j = s;
        while (j < toks.size() &&
               (type_keywords().count(toks[j].text) ||
                (j > s && (toks[j - 1].text == "struct" || toks[j - 1].text == "union" ||
                           toks[j - 1].text == "enum") &&
                 is_ident_start(toks[j].text[0]))))
            ++j;
        // declarator list
        bool any = false;
        while (j < toks.size()) {
            while (j < toks.size() && (toks[j].text == "*" || toks[j].text == "&")) ++j;
            if (j >= toks.size() || !is_ident_start(toks[j].text[0]) ||
                type_keywords().count(toks[j].text))
                break;
            std::string name = toks[j].text;
            ++j;
            // suffixes / initializer / separators
            long d = 0;
            bool looks_like_decl = false;
            while (j < toks.size()) {
                const std::string& x = toks[j].text;
                if (x == "(" || x == "[") ++d;
                else if (x == ")" || x == "]") {
                    if (d == 0) break;
                    --d;
                } else if (d == 0 && (x == "," || x == ";" || x == "=")) break;
                ++j;
            }
            if (j < toks.size() &&
                (toks[j].text == "," || toks[j].text == ";" || toks[j].text == "=" ||
                 toks[j].text == "["))
                looks_like_decl = true;
            if (looks_like_decl) {
                add(name);
                any = true;
            }
            if (j < toks.size() && toks[j].text == "=") {
                long dd = 0;
                ++j;
                while (j < toks.size()) {
                    const std::string& x = toks[j].text;
                    if (x == "(" || x == "[" || x == "{") ++dd;
                    else if (x == ")" || x == "]" || x == "}") --dd;
                    else if (dd == 0 && (x == "," || x == ";")) break;
                    ++j;
                }
            }
            if (j < toks.size() && toks[j].text == ",") {
                ++j;
                continue;
            }
            break;
        }
        (void)any;
    }
    return decls;
}

} // namespace

std::vector<FunctionSample> extract_functions(const std::string& source_text,
                                              const std::string& origin) {
    std::vector<FunctionSample> out;
    if (is_blank(source_text)) return out;
    auto funcs = scan_functions(source_text);
    std::string stem = fs::path(origin).filename().string();
    for (size_t i = 0; i < funcs.size(); ++i) {
        const auto& f = funcs[i];
        FunctionSample s;
        s.id = stem + ":" + f.name + ":" + std::to_string(i);
        s.origin_path = origin;
        s.origin_begin = f.begin;
        s.origin_end = f.end;
        s.name = f.name;
        s.lines = split_lines(source_text.substr(f.begin, f.end - f.begin));
        out.push_back(std::move(s));
    }
    return out;
}

std::set<std::string> defined_function_names(const std::string& source_text) {
    std::set<std::string> names;
    if (is_blank(source_text)) return names;
    for (const auto& f : scan_functions(source_text)) names.insert(f.name);
    return names;
}

FunctionSample normalize(const FunctionSample& sample,
                         const std::set<std::string>& tu_function_names) {
    // 1. strip comments, keep strings, drop blank lines
    std::string joined;
    for (size_t i = 0; i < sample.lines.size(); ++i) {
        joined += sample.lines[i];
        if (i + 1 < sample.lines.size()) joined += '\n';
    }
    auto regions = classify_regions(joined);
    std::string stripped;
    stripped.reserve(joined.size());
    for (size_t i = 0; i < joined.size(); ++i) {
        if (regions[i] == Region::line_comment || regions[i] == Region::block_comment) {
            if (joined[i] == '\n') stripped += '\n';
            continue;
        }
        stripped += joined[i];
    }

    // 2. rename functions and locals over the comment-free text
    auto regions2 = classify_regions(stripped);
    auto toks = lex_code_tokens(stripped, regions2);

    std::set<std::string> func_names = tu_function_names;
    func_names.insert(sample.name);

    std::set<std::string> locals_set;
    std::vector<std::string> locals = collect_locals(toks);
    for (const auto& l : locals) locals_set.insert(l);

    std::map<std::string, std::string> rename;
    int next_func = 1, next_var = 1;
    for (const auto& tok : toks) {
        if (!is_ident_start(tok.text[0])) continue;
        if (rename.count(tok.text)) continue;
        if (func_names.count(tok.text) && !locals_set.count(tok.text)) {
            rename[tok.text] = "FUNC" + std::to_string(next_func++);
        } else if (locals_set.count(tok.text)) {
            rename[tok.text] = "VAR" + std::to_string(next_var++);
        }
    }

    std::string rebuilt;
    rebuilt.reserve(stripped.size());
    size_t pos = 0;
    for (const auto& tok : toks) {
        auto it = rename.find(tok.text);
        if (it == rename.end() || !is_ident_start(tok.text[0])) continue;
        rebuilt.append(stripped, pos, tok.pos - pos);
        rebuilt.append(it->second);
        pos = tok.pos + tok.text.size();
    }
    rebuilt.append(stripped, pos, std::string::npos);

    FunctionSample out = sample;
    out.lines.clear();
    for (auto& line : split_lines(rebuilt)) {
        if (is_blank(line)) continue;
        out.lines.push_back(strip_trailing_ws(line));
    }
    auto it = rename.find(sample.name);
    out.name = it == rename.end() ? sample.name : it->second;
    return out;
}

std::vector<FunctionSample> filter_short(std::vector<FunctionSample> samples,
                                         size_t min_lines) {
    std::vector<FunctionSample> out;
    out.reserve(samples.size());
    for (auto& s : samples)
        if (s.line_count() >= min_lines) out.push_back(std::move(s));
    return out;
}

std::string samples_to_jsonl(const std::vector<FunctionSample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        nlohmann::json j;
        j["id"] = s.id;
        j["origin"] = {{"path", s.origin_path}, {"begin", s.origin_begin}, {"end", s.origin_end}};
        j["name"] = s.name;
        j["label"] = label_name(s.label);
        j["lines"] = s.lines;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<FunctionSample> samples_from_jsonl(const std::string& text) {
    std::vector<FunctionSample> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (is_blank(line)) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        FunctionSample s;
        s.id = j.at("id").get<std::string>();
        s.origin_path = j.at("origin").at("path").get<std::string>();
        s.origin_begin = j.at("origin").at("begin").get<size_t>();
        s.origin_end = j.at("origin").at("end").get<size_t>();
        s.name = j.at("name").get<std::string>();
        s.label = label_from_name(j.at("label").get<std::string>());
        s.lines = j.at("lines").get<std::vector<std::string>>();
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw PipelineError("cannot open " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<FunctionSample> load_source_file(const fs::path& p, Label label) {
    std::string text = read_file(p);
    auto tu_names = defined_function_names(text);
    auto raw = extract_functions(text, p.string());
    std::vector<FunctionSample> out;
    for (auto& s : raw) {
        s.label = label;
        out.push_back(normalize(s, tu_names));
    }
    return out;
}

std::vector<FunctionSample> load_manifest(const fs::path& manifest) {
    std::ifstream f(manifest);
    if (!f) throw PipelineError("cannot open manifest " + manifest.string());
    fs::path base = manifest.parent_path();
    std::vector<FunctionSample> out;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (is_blank(line)) continue;
        std::istringstream ls(line);
        std::string path, fname, label;
        std::getline(ls, path, ',');
        std::getline(ls, fname, ',');
        std::getline(ls, label, ',');
        if (first && path == "path") { // optional header row
            first = false;
            continue;
        }
        first = false;
        fs::path full = fs::path(path).is_absolute() ? fs::path(path) : base / path;
        std::string text = read_file(full);
        auto tu_names = defined_function_names(text);
        for (auto& s : extract_functions(text, full.string())) {
            if (!fname.empty() && s.name != fname) continue;
            s.label = label_from_name(label);
            out.push_back(normalize(s, tu_names));
        }
    }
    return out;
}

} // namespace

std::vector<FunctionSample> load_corpus(const std::string& path) {
    fs::path p(path);
    if (fs::is_regular_file(p)) {
        if (p.extension() == ".jsonl") return samples_from_jsonl(read_file(p));
        return load_manifest(p);
    }
    if (!fs::is_directory(p)) throw PipelineError("no such corpus: " + path);
    std::vector<FunctionSample> out;
    std::vector<fs::path> files;
    for (auto& entry : fs::recursive_directory_iterator(p)) {
        if (!entry.is_regular_file()) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        Label label = Label::unlabeled;
        for (auto parent = file.parent_path(); parent.has_relative_path();
             parent = parent.parent_path()) {
            std::string dir = parent.filename().string();
            if (dir == "vulnerable" || dir == "safe") {
                label = label_from_name(dir);
                break;
            }
            if (parent == p) break;
        }
        auto samples = load_source_file(file, label);
        out.insert(out.end(), samples.begin(), samples.end());
    }
    return out;
}

} // namespace vmc

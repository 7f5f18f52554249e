// Line-granularity code property graph construction.
//
// The CFG is built by structural recursion over the brace tree (canonical
// `... {` / `}` style, one construct header per line). Control dependence
// follows Ferrante/Ottenstein/Warren: for every CFG edge (u, v) where v does
// not post-dominate u, every node from v up to (but excluding) ipdom(u) in
// the post-dominator tree is control-dependent on u. Post-dominators come
// from the iterative dominance algorithm of Cooper, Harvey and Kennedy run
// on the reverse CFG. Data dependence is classic reaching definitions over
// the CFG, at line granularity and restricted to normalized VARn locals.

#include "vmc/cpg.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace vmc {

const char* edge_kind_name(EdgeKind k) {
    switch (k) {
    case EdgeKind::AST: return "AST";
    case EdgeKind::CFG: return "CFG";
    case EdgeKind::CDG: return "CDG";
    default: return "DDG";
    }
}

CodeGraph::CodeGraph(int num_lines, std::vector<GraphEdge> edges)
    : num_lines_(num_lines), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    adj_.assign(static_cast<size_t>(num_lines_) * num_lines_, 0);
    for (const auto& e : edges_) {
        if (e.src < 1 || e.src > num_lines_ || e.dst < 1 || e.dst > num_lines_)
            throw PipelineError("edge endpoint out of range");
        if (e.src != e.dst) adj_[idx(e.src, e.dst)] = 1;
    }
}

std::string CodeGraph::dump_edges() const {
    std::ostringstream os;
    for (const auto& e : edges_)
        os << e.src << ' ' << edge_kind_name(e.kind) << ' ' << e.dst << '\n';
    return os.str();
}

std::vector<DegreeProfile> degree_profile(const CodeGraph& graph) {
    int n = graph.num_lines();
    std::vector<DegreeProfile> out(n, DegreeProfile{0, 0, 0});
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (graph.adjacent(i, j)) {
                ++out[i - 1].out_degree;
                ++out[j - 1].in_degree;
            }
    for (auto& d : out) d.degree = d.in_degree + d.out_degree;
    return out;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Blanks out string/char literal contents (quotes kept) so structural scans
// can't trip over braces or keywords inside literals.
std::string blank_literals(const std::string& line) {
    std::string out = line;
    bool in_str = false, in_chr = false;
    for (size_t i = 0; i < out.size(); ++i) {
        char c = out[i];
        if (in_str || in_chr) {
            char quote = in_str ? '"' : '\'';
            if (c == '\\') {
                if (i + 1 < out.size()) out[i + 1] = ' ';
                out[i] = ' ';
                ++i;
            } else if (c == quote) {
                in_str = in_chr = false;
            } else {
                out[i] = ' ';
            }
        } else if (c == '"') {
            in_str = true;
        } else if (c == '\'') {
            in_chr = true;
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> line_tokens(const std::string& blanked) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < blanked.size()) {
        char c = blanked[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (ident_start(c)) {
            size_t j = i;
            while (j < blanked.size() && ident_char(blanked[j])) ++j;
            toks.push_back(blanked.substr(i, j - i));
            i = j;
        } else {
            toks.push_back(std::string(1, c));
            ++i;
        }
    }
    return toks;
}

enum class LineKind {
    plain,
    return_stmt,
    break_stmt,
    continue_stmt,
    if_open,
    elseif_open, // "} else if (...) {"
    else_open,   // "} else {"
    while_open,
    for_open,
    block_open, // signature or anonymous block
    close       // "}" or "};"
};

struct LineInfo {
    LineKind kind = LineKind::plain;
    std::string blanked;
};

LineInfo classify_line(const std::string& raw, int line_no) {
    LineInfo info;
    info.blanked = blank_literals(raw);
    std::string t = trim(info.blanked);
    auto toks = line_tokens(t);
    if (toks.empty()) {
        info.kind = LineKind::plain; // blank; unreachable after normalize
        return info;
    }
    int net = 0;
    for (const auto& w : toks) {
        if (w == "{") ++net;
        if (w == "}") --net;
    }
    bool opens = !toks.empty() && toks.back() == "{";

    const std::string& head = toks[0];
    if (head == "goto" || head == "switch" || head == "case" || head == "default" ||
        head == "do")
        throw MalformedControlStructure(line_no, "unsupported control structure '" + head +
                                                     "' at line " + std::to_string(line_no));

    if (head == "}") {
        if (toks.size() == 1 || (toks.size() == 2 && toks[1] == ";")) {
            info.kind = LineKind::close;
            return info;
        }
        if (toks.size() >= 2 && toks[1] == "else") {
            if (toks.size() == 3 && toks[2] == "{") {
                info.kind = LineKind::else_open;
                return info;
            }
            if (toks.size() >= 4 && toks[2] == "if" && opens && net == 0) {
                info.kind = LineKind::elseif_open;
                return info;
            }
        }
        throw MalformedControlStructure(line_no,
                                        "malformed '}' line at line " + std::to_string(line_no));
    }
    if (head == "else") {
        // tolerate "else {" on its own line
        if (toks.size() == 2 && toks[1] == "{") {
            info.kind = LineKind::else_open;
            return info;
        }
        throw MalformedControlStructure(line_no,
                                        "malformed else at line " + std::to_string(line_no));
    }
    if (head == "if" || head == "while" || head == "for") {
        if (opens && net == 1) {
            info.kind = head == "if" ? LineKind::if_open
                        : head == "while" ? LineKind::while_open
                                          : LineKind::for_open;
            return info;
        }
        if (net == 0 && !opens && std::count(toks.begin(), toks.end(), "{") ==
                                      std::count(toks.begin(), toks.end(), "}") &&
            std::count(toks.begin(), toks.end(), "{") > 0) {
            info.kind = LineKind::plain; // whole construct on one line
            return info;
        }
        throw MalformedControlStructure(line_no, "'" + head + "' without braced block at line " +
                                                     std::to_string(line_no));
    }
    if (head == "return") {
        info.kind = LineKind::return_stmt;
        return info;
    }
    if (head == "break" && toks.size() >= 1) {
        info.kind = LineKind::break_stmt;
        return info;
    }
    if (head == "continue") {
        info.kind = LineKind::continue_stmt;
        return info;
    }
    if (opens && net == 1) {
        info.kind = LineKind::block_open;
        return info;
    }
    if (net != 0)
        throw MalformedControlStructure(line_no, "unbalanced braces in line " +
                                                     std::to_string(line_no));
    info.kind = LineKind::plain;
    return info;
}

struct Construct {
    enum class Type { stmt, if_stmt, loop, block } type = Type::stmt;
    LineKind stmt_kind = LineKind::plain; // for type == stmt
    int line = 0;                         // header or statement line
    std::vector<Construct> body;          // then-body for if
    int else_line = 0;                    // "} else {" / "} else if" line, 0 if none
    std::vector<Construct> else_body;
    int close_line = 0; // final '}' of this construct (0 for stmt)
};

class StructureParser {
public:
    StructureParser(const std::vector<LineInfo>& lines) : lines_(lines) {}

    std::vector<Construct> parse_top() {
        auto body = parse_body(/*stop_at_close=*/false);
        if (pos_ != lines_.size())
            throw MalformedControlStructure(static_cast<int>(pos_) + 1,
                                            "unexpected '}' at line " + std::to_string(pos_ + 1));
        return body;
    }

private:
    LineKind kind_at(size_t i) const { return lines_[i].kind; }
    int lineno(size_t i) const { return static_cast<int>(i) + 1; }

    // Parses constructs until a closer (close / else_open / elseif_open) at
    // this level or end of input. The closer is left unconsumed.
    std::vector<Construct> parse_body(bool stop_at_close) {
        std::vector<Construct> body;
        while (pos_ < lines_.size()) {
            LineKind k = kind_at(pos_);
            if (k == LineKind::close || k == LineKind::else_open || k == LineKind::elseif_open) {
                if (!stop_at_close)
                    throw MalformedControlStructure(lineno(pos_), "unmatched '}' at line " +
                                                                      std::to_string(lineno(pos_)));
                return body;
            }
            body.push_back(parse_construct());
        }
        if (stop_at_close)
            throw MalformedControlStructure(static_cast<int>(lines_.size()),
                                            "missing '}' before end of function");
        return body;
    }

    Construct parse_construct() {
        LineKind k = kind_at(pos_);
        Construct c;
        c.line = lineno(pos_);
        switch (k) {
        case LineKind::plain:
        case LineKind::return_stmt:
        case LineKind::break_stmt:
        case LineKind::continue_stmt:
            c.type = Construct::Type::stmt;
            c.stmt_kind = k;
            ++pos_;
            return c;
        case LineKind::if_open:
        case LineKind::elseif_open:
            return parse_if();
        case LineKind::while_open:
        case LineKind::for_open:
            c.type = Construct::Type::loop;
            ++pos_;
            c.body = parse_body(true);
            c.close_line = expect_plain_close();
            return c;
        case LineKind::block_open:
            c.type = Construct::Type::block;
            ++pos_;
            c.body = parse_body(true);
            c.close_line = expect_plain_close();
            return c;
        default:
            throw MalformedControlStructure(c.line,
                                            "unexpected line " + std::to_string(c.line));
        }
    }

    Construct parse_if() {
        Construct c;
        c.type = Construct::Type::if_stmt;
        c.line = lineno(pos_);
        ++pos_;
        c.body = parse_body(true);
        if (pos_ >= lines_.size())
            throw MalformedControlStructure(static_cast<int>(lines_.size()),
                                            "missing '}' before end of function");
        LineKind closer = kind_at(pos_);
        if (closer == LineKind::close) {
            c.close_line = lineno(pos_);
            ++pos_;
            return c;
        }
        if (closer == LineKind::else_open) {
            c.else_line = lineno(pos_);
            ++pos_;
            c.else_body = parse_body(true);
            c.close_line = expect_plain_close();
            return c;
        }
        // "} else if (...) {": the closer line heads a chained if construct
        c.else_line = lineno(pos_);
        Construct chained = parse_if();
        c.close_line = chained.close_line;
        c.else_body.push_back(std::move(chained));
        return c;
    }

    int expect_plain_close() {
        if (pos_ >= lines_.size() || kind_at(pos_) != LineKind::close)
            throw MalformedControlStructure(
                pos_ < lines_.size() ? lineno(pos_) : static_cast<int>(lines_.size()),
                "expected '}'");
        int ln = lineno(pos_);
        ++pos_;
        return ln;
    }

    const std::vector<LineInfo>& lines_;
    size_t pos_ = 0;
};

struct LoopCtx {
    int header;
    std::vector<int>* breaks;
};

class CfgBuilder {
public:
    CfgBuilder(int num_lines) : exit_node_(num_lines + 1), succ_(num_lines + 2) {}

    int exit_node() const { return exit_node_; }
    const std::vector<std::vector<int>>& succ() const { return succ_; }

    void build(const std::vector<Construct>& top) {
        auto [entry, exits] = gen_seq(top);
        (void)entry;
        for (int e : exits) add_edge(e, exit_node_);
    }

private:
    void add_edge(int from, int to) {
        auto& s = succ_[from];
        if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
    }

    std::pair<int, std::vector<int>> gen_seq(const std::vector<Construct>& body) {
        int entry = 0;
        std::vector<int> pending;
        for (const auto& c : body) {
            auto [e, x] = gen(c);
            if (entry == 0) entry = e;
            for (int p : pending) add_edge(p, e);
            pending = std::move(x);
        }
        return {entry, pending};
    }

    std::pair<int, std::vector<int>> gen(const Construct& c) {
        switch (c.type) {
        case Construct::Type::stmt:
            switch (c.stmt_kind) {
            case LineKind::return_stmt:
                add_edge(c.line, exit_node_);
                return {c.line, {}};
            case LineKind::break_stmt: {
                if (loops_.empty())
                    throw MalformedControlStructure(c.line, "break outside loop at line " +
                                                                std::to_string(c.line));
                loops_.back().breaks->push_back(c.line);
                return {c.line, {}};
            }
            case LineKind::continue_stmt: {
                if (loops_.empty())
                    throw MalformedControlStructure(c.line, "continue outside loop at line " +
                                                                std::to_string(c.line));
                add_edge(c.line, loops_.back().header);
                return {c.line, {}};
            }
            default:
                return {c.line, {c.line}};
            }
        case Construct::Type::if_stmt: {
            std::vector<int> exits;
            auto [te, tx] = gen_seq(c.body);
            if (te != 0) {
                add_edge(c.line, te);
                exits.insert(exits.end(), tx.begin(), tx.end());
            } else {
                exits.push_back(c.line);
            }
            auto [ee, ex] = gen_seq(c.else_body);
            if (ee != 0) {
                add_edge(c.line, ee);
                exits.insert(exits.end(), ex.begin(), ex.end());
            } else {
                exits.push_back(c.line);
            }
            return {c.line, exits};
        }
        case Construct::Type::loop: {
            std::vector<int> breaks;
            loops_.push_back({c.line, &breaks});
            auto [be, bx] = gen_seq(c.body);
            loops_.pop_back();
            if (be != 0) add_edge(c.line, be);
            for (int e : bx) add_edge(e, c.line);
            if (be == 0) add_edge(c.line, c.line); // empty body loops on itself
            std::vector<int> exits = {c.line};
            exits.insert(exits.end(), breaks.begin(), breaks.end());
            return {c.line, exits};
        }
        case Construct::Type::block:
        default: {
            auto [be, bx] = gen_seq(c.body);
            if (be != 0) {
                add_edge(c.line, be);
                return {c.line, bx};
            }
            return {c.line, {c.line}};
        }
        }
    }

    int exit_node_;
    std::vector<std::vector<int>> succ_;
    std::vector<LoopCtx> loops_;
};

// Immediate post-dominators, computed as dominators of the reverse CFG
// rooted at the virtual exit (iterative algorithm over reverse postorder).
class PostDominators {
public:
    PostDominators(const std::vector<std::vector<int>>& succ, int exit_node)
        : n_(static_cast<int>(succ.size())), ipdom_(n_, -1), rpo_number_(n_, -1) {
        std::vector<std::vector<int>> pred(n_);
        for (int u = 0; u < n_; ++u)
            for (int v : succ[u]) pred[v].push_back(u);

        // reverse postorder of the reverse graph (edges v->u for CFG u->v)
        std::vector<int> order;
        std::vector<uint8_t> seen(n_, 0);
        std::vector<std::pair<int, size_t>> stack;
        stack.push_back({exit_node, 0});
        seen[exit_node] = 1;
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            if (idx < pred[node].size()) {
                int nxt = pred[node][idx++];
                if (!seen[nxt]) {
                    seen[nxt] = 1;
                    stack.push_back({nxt, 0});
                }
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        std::reverse(order.begin(), order.end()); // exit first
        for (size_t i = 0; i < order.size(); ++i) rpo_number_[order[i]] = static_cast<int>(i);

        ipdom_[exit_node] = exit_node;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int node : order) {
                if (node == exit_node) continue;
                int new_idom = -1;
                for (int s : succ[node]) { // preds in the reverse graph
                    if (ipdom_[s] == -1) continue;
                    new_idom = new_idom == -1 ? s : intersect(s, new_idom);
                }
                if (new_idom != -1 && ipdom_[node] != new_idom) {
                    ipdom_[node] = new_idom;
                    changed = true;
                }
            }
        }
    }

    int ipdom(int v) const { return ipdom_[v]; }

    bool post_dominates(int a, int b) const { // a pdom b
        if (a == b) return true;
        int v = b;
        while (ipdom_[v] != v) {
            v = ipdom_[v];
            if (v == a) return true;
        }
        return v == a;
    }

private:
    int intersect(int a, int b) const {
        while (a != b) {
            while (rpo_number_[a] > rpo_number_[b]) a = ipdom_[a];
            while (rpo_number_[b] > rpo_number_[a]) b = ipdom_[b];
        }
        return a;
    }

    int n_;
    std::vector<int> ipdom_;
    std::vector<int> rpo_number_;
};

// --- def/use extraction ------------------------------------------------

bool is_var_token(const std::string& t) {
    if (t.size() < 4 || t.compare(0, 3, "VAR") != 0) return false;
    return std::all_of(t.begin() + 3, t.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

const std::set<std::string>& decl_type_keywords() {
    static const std::set<std::string> kw = {
        "void",    "int",      "char",   "short",   "long",     "unsigned", "signed",
        "float",   "double",   "bool",   "size_t",  "ssize_t",  "int8_t",   "int16_t",
        "int32_t", "int64_t",  "uint8_t", "uint16_t", "uint32_t", "uint64_t", "struct",
        "union",   "enum",     "const",  "static",  "register", "volatile", "FILE"};
    return kw;
}

} // namespace

LineDefUse line_def_use(const std::string& line) {
    std::string blanked = blank_literals(line);
    LineDefUse out;
    std::set<std::string> defs, uses;

    struct Occ {
        std::string name;
        size_t begin, end;
    };
    std::vector<Occ> occs;
    for (size_t i = 0; i < blanked.size();) {
        if (ident_start(blanked[i])) {
            size_t j = i;
            while (j < blanked.size() && ident_char(blanked[j])) ++j;
            occs.push_back({blanked.substr(i, j - i), i, j});
            i = j;
        } else {
            ++i;
        }
    }

    auto skip_ws_fwd = [&](size_t p) {
        while (p < blanked.size() && (blanked[p] == ' ' || blanked[p] == '\t')) ++p;
        return p;
    };
    auto skip_ws_back = [&](size_t p) -> long {
        long q = static_cast<long>(p) - 1;
        while (q >= 0 && (blanked[q] == ' ' || blanked[q] == '\t')) --q;
        return q;
    };

    // declaration detection: statement (or for-init) starting with a type
    // keyword declares the identifiers in its declarator positions
    auto toks = line_tokens(blanked);
    std::set<std::string> declared;
    {
        size_t t0 = 0;
        if (!toks.empty() && toks[0] == "for" && toks.size() > 1 && toks[1] == "(") t0 = 2;
        bool sig = !toks.empty() && toks.back() == "{" &&
                   std::find(toks.begin(), toks.end(), "(") != toks.end() &&
                   toks[0] != "if" && toks[0] != "while" && toks[0] != "for" && toks[0] != "}" &&
                   toks[0] != "else";
        if (sig) {
            // parameters: identifier before ',' / ')' / '[' inside the parens
            size_t i = 0;
            while (i < toks.size() && toks[i] != "(") ++i;
            long depth = 1;
            std::string last_ident;
            std::string prev;
            for (size_t j = i + 1; j < toks.size() && depth > 0; ++j) {
                const std::string& w = toks[j];
                if (w == "(") ++depth;
                else if (w == ")") {
                    if (--depth == 0 && is_var_token(last_ident)) declared.insert(last_ident);
                } else if (w == "," && depth == 1) {
                    if (is_var_token(last_ident)) declared.insert(last_ident);
                    last_ident.clear();
                } else if (w == "[") {
                    if (is_var_token(last_ident)) declared.insert(last_ident);
                    last_ident.clear();
                } else if (ident_start(w[0]) && !decl_type_keywords().count(w) &&
                           prev != "struct" && prev != "union" && prev != "enum") {
                    last_ident = w;
                }
                prev = w;
            }
        } else if (t0 < toks.size() && decl_type_keywords().count(toks[t0])) {
            size_t j = t0;
            std::string prev;
            while (j < toks.size() &&
                   (decl_type_keywords().count(toks[j]) ||
                    ((prev == "struct" || prev == "union" || prev == "enum") &&
                     ident_start(toks[j][0])))) {
                prev = toks[j];
                ++j;
            }
            // declarator list: [*]* IDENT [array/init] (, ...)*
            while (j < toks.size()) {
                while (j < toks.size() && (toks[j] == "*" || toks[j] == "&")) ++j;
                if (j >= toks.size() || !ident_start(toks[j][0])) break;
                if (is_var_token(toks[j])) declared.insert(toks[j]);
                ++j;
                long depth = 0;
                while (j < toks.size()) {
                    const std::string& w = toks[j];
                    if (w == "(" || w == "[") ++depth;
                    else if (w == ")" || w == "]") --depth;
                    else if (depth == 0 && (w == "," || w == ";")) break;
                    ++j;
                }
                if (j < toks.size() && toks[j] == ",") {
                    ++j;
                    continue;
                }
                break;
            }
        }
    }

    for (const auto& occ : occs) {
        if (!is_var_token(occ.name)) continue;
        if (declared.count(occ.name)) {
            // first occurrence of a declared name is the declarator (a def);
            // later occurrences on the same line are normal uses
            declared.erase(occ.name);
            defs.insert(occ.name);
            continue;
        }
        bool def = false, also_use = false;
        // ++/-- immediately before
        long q = skip_ws_back(occ.begin);
        if (q >= 1 && ((blanked[q] == '+' && blanked[q - 1] == '+') ||
                       (blanked[q] == '-' && blanked[q - 1] == '-'))) {
            def = true;
            also_use = true;
        }
        // scan past subscript suffixes
        size_t p = occ.end;
        bool subscripted = false;
        while (true) {
            p = skip_ws_fwd(p);
            if (p < blanked.size() && blanked[p] == '[') {
                subscripted = true;
                long d = 1;
                ++p;
                while (p < blanked.size() && d > 0) {
                    if (blanked[p] == '[') ++d;
                    if (blanked[p] == ']') --d;
                    ++p;
                }
            } else {
                break;
            }
        }
        if (p + 1 < blanked.size() &&
            ((blanked[p] == '+' && blanked[p + 1] == '+') ||
             (blanked[p] == '-' && blanked[p + 1] == '-'))) {
            def = true;
            also_use = true;
        } else if (p < blanked.size() && blanked[p] == '=' &&
                   (p + 1 >= blanked.size() || blanked[p + 1] != '=')) {
            def = true;
            also_use = subscripted; // writing through x[i] still reads x
        } else if (p + 1 < blanked.size() && blanked[p + 1] == '=' &&
                   std::string("+-*/%&|^").find(blanked[p]) != std::string::npos) {
            def = true;
            also_use = true;
        }
        if (def) {
            defs.insert(occ.name);
            if (also_use) uses.insert(occ.name);
        } else {
            uses.insert(occ.name);
        }
    }

    out.defs.assign(defs.begin(), defs.end());
    out.uses.assign(uses.begin(), uses.end());
    return out;
}

StatementCfg build_statement_cfg(const FunctionSample& sample) {
    int num_lines = static_cast<int>(sample.lines.size());
    if (num_lines == 0) throw PipelineError("empty sample");
    std::vector<LineInfo> info;
    info.reserve(num_lines);
    for (int i = 0; i < num_lines; ++i) info.push_back(classify_line(sample.lines[i], i + 1));
    StructureParser parser(info);
    auto top = parser.parse_top();
    CfgBuilder cfg(num_lines);
    cfg.build(top);
    return {cfg.exit_node(), cfg.succ()};
}

CodeGraph build_cpg(const FunctionSample& sample) {
    int num_lines = static_cast<int>(sample.lines.size());
    if (num_lines == 0) throw PipelineError("empty sample");

    std::vector<LineInfo> info;
    info.reserve(num_lines);
    for (int i = 0; i < num_lines; ++i) info.push_back(classify_line(sample.lines[i], i + 1));

    StructureParser parser(info);
    auto top = parser.parse_top();

    std::vector<GraphEdge> edges;

    // AST: block opener -> lines directly inside its block (including the
    // closer and any else lines, which belong to their construct)
    {
        struct AstWalk {
            std::vector<GraphEdge>& edges;
            void walk_body(int owner, const std::vector<Construct>& body) {
                for (const auto& c : body) {
                    if (owner != 0) edges.push_back({owner, c.line, EdgeKind::AST});
                    walk(c);
                }
            }
            void walk(const Construct& c) {
                switch (c.type) {
                case Construct::Type::stmt: return;
                case Construct::Type::if_stmt: {
                    walk_body(c.line, c.body);
                    if (c.else_line != 0) {
                        edges.push_back({c.line, c.else_line, EdgeKind::AST});
                        bool chained = c.else_body.size() == 1 &&
                                       c.else_body[0].type == Construct::Type::if_stmt &&
                                       c.else_body[0].line == c.else_line;
                        if (chained) {
                            // "} else if" heads the nested construct; it owns
                            // its own children and the final closer
                            walk(c.else_body[0]);
                        } else {
                            walk_body(c.else_line, c.else_body);
                            edges.push_back({c.else_line, c.close_line, EdgeKind::AST});
                        }
                    } else {
                        edges.push_back({c.line, c.close_line, EdgeKind::AST});
                    }
                    return;
                }
                case Construct::Type::loop:
                case Construct::Type::block:
                    walk_body(c.line, c.body);
                    edges.push_back({c.line, c.close_line, EdgeKind::AST});
                    return;
                }
            }
        } ast{edges};
        ast.walk_body(0, top);
    }

    // CFG
    CfgBuilder cfg(num_lines);
    cfg.build(top);
    const auto& succ = cfg.succ();
    int exit_node = cfg.exit_node();
    for (int u = 1; u <= num_lines; ++u)
        for (int v : succ[u])
            if (v != exit_node) edges.push_back({u, v, EdgeKind::CFG});

    // CDG (Ferrante/Ottenstein/Warren on the post-dominator tree)
    {
        PostDominators pdom(succ, exit_node);
        for (int u = 1; u <= num_lines; ++u) {
            for (int v : succ[u]) {
                if (pdom.post_dominates(v, u)) continue;
                int stop = pdom.ipdom(u);
                for (int w = v; w != stop && w != exit_node; w = pdom.ipdom(w))
                    edges.push_back({u, w, EdgeKind::CDG});
            }
        }
    }

    // DDG: reaching definitions over the CFG
    {
        std::vector<LineDefUse> du(num_lines + 1);
        for (int i = 1; i <= num_lines; ++i) du[i] = line_def_use(sample.lines[i - 1]);

        struct DefSite {
            int line;
            std::string var;
        };
        std::vector<DefSite> sites;
        std::map<std::pair<int, std::string>, int> site_id;
        std::map<std::string, std::vector<int>> sites_of_var;
        for (int i = 1; i <= num_lines; ++i)
            for (const auto& v : du[i].defs) {
                int id = static_cast<int>(sites.size());
                sites.push_back({i, v});
                site_id[{i, v}] = id;
                sites_of_var[v].push_back(id);
            }

        std::vector<std::vector<int>> pred(num_lines + 2);
        for (int u = 1; u <= num_lines; ++u)
            for (int v : succ[u])
                if (v != exit_node) pred[v].push_back(u);

        std::vector<std::set<int>> in(num_lines + 1), out_(num_lines + 1);
        bool changed = true;
        while (changed) {
            changed = false;
            for (int ln = 1; ln <= num_lines; ++ln) {
                std::set<int> in_new;
                for (int p : pred[ln]) in_new.insert(out_[p].begin(), out_[p].end());
                std::set<int> out_new = in_new;
                for (const auto& v : du[ln].defs) {
                    for (int id : sites_of_var[v]) out_new.erase(id);
                    out_new.insert(site_id[{ln, v}]);
                }
                if (in_new != in[ln] || out_new != out_[ln]) {
                    in[ln] = std::move(in_new);
                    out_[ln] = std::move(out_new);
                    changed = true;
                }
            }
        }

        for (int ln = 1; ln <= num_lines; ++ln) {
            std::set<std::string> used(du[ln].uses.begin(), du[ln].uses.end());
            for (int id : in[ln])
                if (used.count(sites[id].var))
                    edges.push_back({sites[id].line, ln, EdgeKind::DDG});
        }
    }

    return CodeGraph(num_lines, std::move(edges));
}

} // namespace vmc

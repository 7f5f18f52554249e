#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "vmc/common.hpp"

namespace vmc {

// One extracted function: verbatim lines plus where it came from.
struct FunctionSample {
    std::string id;
    std::string origin_path;
    size_t origin_begin = 0; // byte span in the source file
    size_t origin_end = 0;
    std::string name; // defined function name ("FUNC1" after normalization)
    std::vector<std::string> lines;
    Label label = Label::unlabeled;

    size_t line_count() const { return lines.size(); }
};

// Extracts one sample per top-level function definition, in file order.
// Bodies are captured verbatim from the signature line through the closing
// brace. Throws UnbalancedBraces if the brace structure of the file (outside
// comments and string literals) does not balance.
std::vector<FunctionSample> extract_functions(const std::string& source_text,
                                              const std::string& origin);

// Names of all functions defined at the top level of a source file. Used so
// normalize() can rename calls to sibling functions from the same file.
std::set<std::string> defined_function_names(const std::string& source_text);

// Removes comments, drops lines that end up blank, renames defined functions
// to FUNC1.. and locals/parameters to VAR1.. by first appearance. Identifiers
// in `tu_function_names` (other definitions from the same file) are renamed
// too; everything else, including library callees and string literals, is
// left untouched.
FunctionSample normalize(const FunctionSample& sample,
                         const std::set<std::string>& tu_function_names = {});

// Keeps samples with at least `min_lines` lines, preserving order.
std::vector<FunctionSample> filter_short(std::vector<FunctionSample> samples,
                                         size_t min_lines = 10);

// Line-delimited JSON records, one normalized sample per line.
std::string samples_to_jsonl(const std::vector<FunctionSample>& samples);
std::vector<FunctionSample> samples_from_jsonl(const std::string& text);

// Loads a corpus directory (corpus/<label>/<file>) or a CSV manifest with
// header path,function_name,label. Samples are extracted, normalized and
// returned in deterministic (path, file order) order; no length filter yet.
std::vector<FunctionSample> load_corpus(const std::string& path);

} // namespace vmc

#pragma once
// Versioned prompt texts for the remote backend. Kept in one dedicated
// header so prompt edits never touch algorithm code; bump the version when
// any wording changes.

#include <string_view>

namespace hcag::prompts {

inline constexpr std::string_view kVersion = "1";

inline constexpr std::string_view kSummarizeFile =
    "You are indexing a code repository. Summarize the file below.\n"
    "Reply with a single concise paragraph covering its key functionality, "
    "core logic, inputs/outputs, and dependencies. No preamble.\n";

inline constexpr std::string_view kSummarizeDirectory =
    "You are indexing a code repository. Below are the abstracts of a "
    "directory's children, one per line as 'name: abstract'.\n"
    "Reply with a single concise paragraph characterizing the module's "
    "overall purpose and architecture. No preamble.\n";

inline constexpr std::string_view kJudgeRelevance =
    "Given a task and a module abstract (separated by -----), decide how "
    "relevant the module is to the task.\n"
    "Reply with exactly one word on the first line: fully, partial, or "
    "irrelevant.\n";

inline constexpr std::string_view kJudgeAffirm =
    "Given a requested functionality and a candidate module abstract "
    "(separated by -----), decide whether the candidate is a superset of, or "
    "closely related to, the requested functionality.\n"
    "Reply with exactly one word on the first line: yes or no.\n";

inline constexpr std::string_view kDecomposeTask =
    "Given a task and a list of child modules (one per line as "
    "'path<TAB>abstract'), split the task into subtasks, one per relevant "
    "child.\n"
    "Reply with one line per subtask in the form 'path<TAB>subtask query'. "
    "Output nothing else.\n";

inline constexpr std::string_view kDecomposeDescription =
    "Split the module description below into finer-grained sub-tasks, one "
    "per line. If it cannot be split, output nothing.\n";

inline constexpr std::string_view kGenerate =
    "Generate the code module described by the JSON request below. The "
    "request carries the module description, an optional reference path, and "
    "the first lines of already-generated sibling modules. Reply with the "
    "module code only.\n";

inline constexpr std::string_view kCritique =
    "Review the artifact files in the JSON payload. Reply with a JSON array "
    "of critiques, each {\"file\", \"issue\", \"revision\"} where revision is "
    "the full replacement content. Reply [] if there is nothing to fix.\n";

inline constexpr std::string_view kModerate =
    "Merge the critiques into the files in the JSON payload. Reply with JSON "
    "{\"files\": {path: content}, \"accepted\": n}.\n";

}  // namespace hcag::prompts

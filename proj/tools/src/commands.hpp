#pragma once

#include <string>

namespace CLI {
class App;
}

namespace ecgraph::cli {

// Each add_* wires one subcommand onto app; the callback stores its result
// in exit_code so main can return it after CLI11_PARSE.
void add_digitize_command(CLI::App& app, int& exit_code);
void add_render_command(CLI::App& app, int& exit_code);
void add_train_command(CLI::App& app, int& exit_code);
void add_eval_command(CLI::App& app, int& exit_code);

// "page_0007" style stems for generated files.
std::string page_stem(long index);

} // namespace ecgraph::cli

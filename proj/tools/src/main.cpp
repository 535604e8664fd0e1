#include <cstdio>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ecgraph: render, digitize and classify ECG chart pages"};
  app.require_subcommand(1);

  int exit_code = 0;
  ecgraph::cli::add_digitize_command(app, exit_code);
  ecgraph::cli::add_render_command(app, exit_code);
  ecgraph::cli::add_train_command(app, exit_code);
  ecgraph::cli::add_eval_command(app, exit_code);

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}

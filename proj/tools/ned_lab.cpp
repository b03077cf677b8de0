#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "ned/errors.hpp"
#include "ned/parallel.hpp"

int main(int argc, char** argv) {
    using namespace ned::cli;
    CLI::App app{"ned_lab: nonuniform exponential dichotomies, robustness and attractors"};
    app.require_subcommand(1);
    Shared shared;
    std::function<int()> action;
    app.add_option("--seed", shared.seed, "Pseudo-random seed")->capture_default_str();
    app.add_option("--threads", shared.threads, "Worker threads (0 = NED_LAB_THREADS, else all cores)");
    register_commands(app, shared, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Usage;
    }

    int threads = shared.threads;
    if (threads == 0)
        if (const char* env = std::getenv("NED_LAB_THREADS")) threads = std::atoi(env);
    ned::set_thread_count(threads);

    try {
        return action ? action() : Usage;
    } catch (const ned::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return NumericFailure;
    } catch (const ned::Error& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return ValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ValidationFailure;
    }
}

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "intragen/version.hpp"

// exit codes: 0 success, 1 domain error, 2 usage error
int main(int argc, char** argv) {
    CLI::App app{"trajectory-conditioned interaction toolkit"};
    app.set_version_flag("--version", intragen::kToolVersion);
    app.require_subcommand(1);
    app.allow_extras(false);

    intragen::cli::register_simulate(app);
    intragen::cli::register_encode(app);
    intragen::cli::register_train(app);
    intragen::cli::register_sample(app);
    intragen::cli::register_evaluate(app);
    intragen::cli::register_pipeline(app);
    intragen::cli::register_verify(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// srcsel-fixture: writes the bundled synthetic corpora with a ready config.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "srcsel/errors.hpp"
#include "srcsel/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic fixture (corpora plus config.json)"};
    std::string kind = "pipeline";
    std::string out;
    std::uint64_t seed = 7;
    app.add_option("--kind", kind, "pipeline|tapt|universe")
        ->check(CLI::IsMember({"pipeline", "tapt", "universe"}));
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--seed", seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        namespace syn = srcsel::synthetic;
        const auto path = kind == "tapt"       ? syn::write_tapt_fixture(out, seed)
                          : kind == "universe" ? syn::write_universe_fixture(out, seed)
                                               : syn::write_pipeline_fixture(out, seed);
        std::cout << path.string() << '\n';
    } catch (const srcsel::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

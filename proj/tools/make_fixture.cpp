// Writes the synthetic transient fixture used by the tests to a directory,
// for trying the CLI by hand.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fixture.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write the synthetic transient fixture"};
    std::string out;
    int degrade = -1;
    double degrade_psnr = 12.0;
    wildsieve::fixture::TransientFixtureOptions opt;
    app.add_option("--out", out)->required();
    app.add_option("--frames", opt.frames)->capture_default_str();
    app.add_option("--seed", opt.seed)->capture_default_str();
    app.add_option("--degrade", degrade, "Frame index to degrade");
    app.add_option("--degrade-psnr", degrade_psnr)->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        auto fx = wildsieve::fixture::make_transient_fixture(opt);
        if (degrade >= 0) wildsieve::fixture::degrade_frame(fx, degrade, degrade_psnr, opt.seed + 99);
        wildsieve::fixture::write_fixture(fx, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

// Stability selection on the two-signal AR(1) design, from data to selected set.
#include <stabsel/stabsel.hpp>

#include <iostream>

using namespace stabsel;

int main() {
    const auto d = standardize(simulate(two_signal_spec(0.5, 1)));
    const auto grid = make_grid(d, 100, default_grid_ratio(d.n(), d.p()));
    const auto cv = cross_validate(d, grid, 10, 1);
    std::cout << "lambda_min = " << cv.lambda_min << ", lambda_1se = " << cv.lambda_1se << '\n';

    const auto run = run_stability_selection(d, grid, 200, 1);
    const auto curve = stability_curve(run.matrices);
    const auto choice = choose_lambda(curve);
    if (!choice.lambda) {
        std::cout << "no usable regularization value\n";
        return 1;
    }
    std::cout << to_string(choice.kind) << " lambda = " << *choice.lambda << " (phi = " << *choice.phi_at_lambda << ")\n";

    std::size_t at = 0;
    while (grid[at] != *choice.lambda) ++at;
    const auto set = stable_stability_set(selection_frequencies(run.matrices[at]), 0.6);
    for (const auto& m : set.members) std::cout << "  " << d.names[m.index] << "  freq " << m.frequency << '\n';

    const auto cal = calibrate_pfer(average_selected(run.matrices[at]), d.p(), FixThreshold{0.6}, *choice.lambda);
    std::cout << "PFER bound at pi_thr 0.6: " << cal.pfer_bound << '\n';
}

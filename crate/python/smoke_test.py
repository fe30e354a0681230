"""Smoke test for the degsched Python module.

Build and install the extension first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import json
import math
import tempfile
from pathlib import Path

import degsched


def main() -> None:
    assert "microgrid-1bess" in degsched.fixtures()

    fresh = degsched.cycle_degradation(0.5, 0.3, 25.0, 0.3, 1.0)
    hot = degsched.cycle_degradation(0.5, 0.3, 40.0, 0.3, 1.0)
    assert 0.0 < fresh < hot
    try:
        degsched.cycle_degradation(0.2, 0.5, 25.0, 0.3, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("cycle deeper than its start SOC was accepted")

    data = degsched.Dataset.generate(samples=1000, seed=7)
    assert len(data) == 1000 and data.train_size + data.test_size == 1000
    assert data.to_csv().splitlines()[0] == "soc_start,dod,temp_c,c_rate,soh,delta_soh"

    net = degsched.Net.train(data, sparsity=0.5, mode="warm", epochs=5, dense_epochs=5)
    assert net.active_neurons == 15
    acc = net.accuracy(data)
    assert acc["5"] <= acc["10"] <= acc["15"] and math.isfinite(acc["mse"])
    dense = degsched.Net.train(data, mode="cold", epochs=5)

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "net.json"
        net.save(str(path))
        again = degsched.Net.load(str(path))
        assert again.predict(0.6, 0.2, 25.0, 0.2, 1.0) == net.predict(0.6, 0.2, 25.0, 0.2, 1.0)
        assert json.loads(net.to_json())

    case = degsched.Case.fixture("microgrid-1bess")
    assert case.kind == "microgrid" and case.hours == 24 and case.bess_count == 1

    with_deg = degsched.schedule(case, net)
    without = degsched.schedule(case)
    for s in (with_deg, without):
        assert s.status == "optimal", s
        assert s.violations() == []
    costs = with_deg.costs(reference=dense)
    assert abs(costs["pseudo_total"] - costs["operation"] - costs["bd_cost"]) <= 1e-6 * abs(costs["pseudo_total"])
    assert abs(costs["updated_total"] - costs["operation"] - costs["og_bd_cost"]) <= 1e-9 * abs(costs["updated_total"])
    assert with_deg.nn_binaries > 0 and without.nn_binaries == 0
    assert with_deg.total_discharged <= without.total_discharged + 1e-6
    assert with_deg.bess_csv().splitlines()[0] == "t,name,soc,charge_mw,discharge_mw,dod,c_rate,bd"
    assert all(0.0 <= x <= 1.0 for x in with_deg.soc()["bess"])

    try:
        degsched.lmp(without)
    except ValueError:
        pass
    else:
        raise AssertionError("prices were computed for a microgrid")

    print("degsched smoke test passed:", with_deg, costs)


if __name__ == "__main__":
    main()

"""
Tests for the nodal zone systems, implicit stepping, convection iteration and zone coupling
"""
import math

import numpy as np
import pytest

from conftest import one_zone_document, two_zone_adiabatic_document
from app.core.exceptions import ConvergenceError, SingularSystemError, SolarDistributionError
from app.models.building import Glazing, Layer, NonlinearConvection, PerSurfaceConvection, SolverOptions, Wall
from app.services.building_loader import parse_building
from app.services.engine import SimulationEngine, apply_case
from app.services.thermal import (
    SurfaceClass,
    ZoneBoundary,
    ZoneSystem,
    assemble_zone,
    build_zone_models,
    classify_surface,
    couple_zones,
    discretize_wall,
    distribute_solar_gains,
    initial_state,
    interior_h,
    iterate_nonlinear_convection,
    step_implicit,
    window_transmission,
)


def boundary(temperature=20.0, **extra):
    fields = dict(
        hour=12,
        outdoor_temperature=temperature,
        sky_temperature=temperature,
        exterior_h=16.7,
        ground_temperature=temperature,
    )
    fields.update(extra)
    return ZoneBoundary(**fields)


def two_node_wall(thickness=0.3, film=8.0, inside=20.0, outside=25.0):
    """1 m2 concrete wall between two fixed air temperatures"""
    wall = Wall(name="w", area=1.0, layer=Layer(thickness=thickness, conductivity=1.75, density=2300.0, specific_heat=920.0))
    nodes = discretize_wall(wall)
    g_face, g_core, _ = nodes.conductances
    g_side = 1.0 / (1.0 / film + 1.0 / g_face)
    a = np.array([[-(g_side + g_core), g_core], [g_core, -(g_side + g_core)]])
    b = np.array([g_side * inside, g_side * outside])
    system = ZoneSystem(
        zone="wall",
        node_index={("w", "core_a"): 0, ("w", "core_b"): 1},
        labels=["w.core_a", "w.core_b"],
        capacity=np.array(nodes.capacities),
        matrices={"A_cond": a},
        vectors={"B_cond": b},
        temperatures=np.array([inside, inside]),
    )
    return system, g_side, g_core


class TestWallDiscretization:
    def test_totals(self):
        wall = Wall(name="w", area=10.0, layer=Layer(thickness=0.2, conductivity=1.0, density=2000.0, specific_heat=1000.0))
        nodes = discretize_wall(wall)
        assert nodes.total_resistance == pytest.approx(0.2 / (1.0 * 10.0))
        assert nodes.total_capacity == pytest.approx(2000.0 * 1000.0 * 0.2 * 10.0)
        assert nodes.resistances[1] == pytest.approx(2 * nodes.resistances[0])
        assert nodes.capacities[0] == nodes.capacities[1]


class TestWindowTransmission:
    glazing = Glazing(name="g", area=4.0, tau_beam_normal=0.85, tau_diffuse=0.75)

    def test_normal_incidence(self):
        gains = window_transmission(self.glazing, 500.0, 100.0, 1.0)
        assert gains.beam_transmitted == pytest.approx(4.0 * 0.85 * 500.0)
        assert gains.diffuse_transmitted == pytest.approx(4.0 * 0.75 * 100.0)

    def test_grazing_incidence_blocks_beam(self):
        assert window_transmission(self.glazing, 500.0, 100.0, 0.0).beam_transmitted == 0.0
        assert window_transmission(self.glazing, 500.0, 100.0, -0.4).beam_transmitted == 0.0

    def test_transmittance_decreases_with_incidence(self):
        values = [window_transmission(self.glazing, 100.0, 0.0, c).beam_transmitted for c in (1.0, 0.8, 0.5, 0.2)]
        assert values == sorted(values, reverse=True)


class TestSolarDistribution:
    def test_conserves_entering_power(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = rng.integers(2, 8)
            areas = rng.uniform(1.0, 30.0, n)
            alpha = rng.uniform(0.05, 0.95, n)
            floors = [0] if rng.random() < 0.8 else []
            absorbed = distribute_solar_gains(areas, alpha, 800.0, 300.0, floors)
            assert absorbed.sum() == pytest.approx(1100.0, abs=0.1)
            assert (absorbed >= 0).all()

    def test_beam_lands_on_floor_first(self):
        absorbed = distribute_solar_gains([10.0, 10.0], [1.0, 1.0], 100.0, 0.0, [0])
        np.testing.assert_allclose(absorbed, [100.0, 0.0])

    def test_diffuse_split_by_area(self):
        absorbed = distribute_solar_gains([10.0, 30.0], [1.0, 1.0], 0.0, 100.0, [0])
        np.testing.assert_allclose(absorbed, [25.0, 75.0])

    def test_all_reflective_enclosure_rejected(self):
        with pytest.raises(SolarDistributionError):
            distribute_solar_gains([10.0, 10.0], [0.0, 0.0], 100.0, 0.0, [0])

    def test_nothing_entering(self):
        np.testing.assert_array_equal(distribute_solar_gains([1.0, 2.0], [0.0, 0.0], 0.0, 0.0, []), [0.0, 0.0])


class TestIndoorConvection:
    def test_classification(self):
        assert classify_surface(0.0) is SurfaceClass.FLOOR_HEAT_UP
        assert classify_surface(math.pi) is SurfaceClass.CEILING_HEAT_DOWN
        assert classify_surface(math.pi / 2) is SurfaceClass.VERTICAL
        assert classify_surface(0.0, delta_t=2.0) is SurfaceClass.FLOOR_HEAT_UP
        assert classify_surface(0.0, delta_t=-2.0) is SurfaceClass.CEILING_HEAT_DOWN
        assert classify_surface(math.pi, delta_t=-2.0) is SurfaceClass.FLOOR_HEAT_UP
        assert classify_surface(math.pi, delta_t=2.0) is SurfaceClass.CEILING_HEAT_DOWN

    def test_per_surface_values_ignore_delta_t(self):
        model = PerSurfaceConvection()
        assert interior_h(model, SurfaceClass.FLOOR_HEAT_UP, 10.0) == 4.04
        assert interior_h(model, SurfaceClass.CEILING_HEAT_DOWN, 0.0) == 0.95
        assert interior_h(model, SurfaceClass.VERTICAL, -3.0) == 3.08

    def test_nonlinear_power_law(self):
        model = NonlinearConvection()
        assert interior_h(model, SurfaceClass.VERTICAL, 8.0) == pytest.approx(1.31 * 2.0)
        assert interior_h(model, SurfaceClass.CEILING_HEAT_DOWN, -16.0) == pytest.approx(0.59 * 2.0)
        assert interior_h(model, SurfaceClass.VERTICAL, 0.0) == 0.0

    def test_unit_difference_gives_the_coefficient(self):
        model = NonlinearConvection()
        assert interior_h(model, SurfaceClass.VERTICAL, 1.0) == pytest.approx(1.31)
        assert interior_h(model, SurfaceClass.VERTICAL, -1.0) == pytest.approx(1.31)
        assert interior_h(model, SurfaceClass.FLOOR_HEAT_UP, 1.0) == pytest.approx(1.52)


class TestZoneModel:
    def test_node_layout(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        # air + 5 exterior walls x 4 nodes + ground slab x 3 nodes
        assert model.size == 1 + 5 * 4 + 3
        assert model.labels[0] == "room.air"
        assert model.capacity[0] == pytest.approx(1.2 * 1006.0 * 27.0)

    def test_inner_faces_orientation(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        tilts = {s.component: s.tilt for s in model.surfaces}
        assert tilts["ground_slab"] == pytest.approx(0.0)
        assert tilts["roof_slab"] == pytest.approx(math.pi)
        assert tilts["wall_n"] == pytest.approx(math.pi / 2)
        assert [model.surfaces[k].component for k in model.floor_positions] == ["ground_slab"]

    def test_conduction_matrix_is_conservative(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        np.testing.assert_allclose(model.a_cond, model.a_cond.T)
        np.testing.assert_allclose(model.a_cond.sum(axis=1), 0.0, atol=1e-9)

    def test_interior_longwave_is_conservative(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        np.testing.assert_allclose(model.a_lwi, model.a_lwi.T)
        np.testing.assert_allclose(model.a_lwi.sum(axis=1), 0.0, atol=1e-9)

    def test_split_partition_is_shared(self):
        models = build_zone_models(parse_building(two_zone_adiabatic_document()))
        left, right = models["left"], models["right"]
        assert ("partition_wall", "face_a") in left.node_index
        assert ("partition_wall", "core_b") in right.node_index
        assert ("partition_wall", "core_b") not in left.node_index
        (link,) = left.connex
        assert link.neighbour == "right"
        assert link.neighbour_node == ("partition_wall", "core_b")


class TestAssembly:
    def test_isothermal_equilibrium(self, one_zone):
        """Exterior wall at 30 C on both sides, no sun: every flux vanishes"""
        model = build_zone_models(one_zone)["room"]
        temperatures = np.full(model.size, 30.0)
        system = assemble_zone(model, boundary(30.0), {}, temperatures)
        np.testing.assert_allclose(system.residual(temperatures), 0.0, atol=1e-9)

    def test_isolated_zone(self):
        building = parse_building({"site": {"latitude_deg": 0.0, "longitude_deg": 0.0},
                                   "zones": [{"name": "box", "volume": 10.0}]})
        model = build_zone_models(building)["box"]
        system = assemble_zone(model, boundary(), {}, initial_state(model))
        np.testing.assert_array_equal(system.A, [[0.0]])
        np.testing.assert_array_equal(system.B, [0.0])

    def test_all_terms_present(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        system = assemble_zone(model, boundary(), {}, initial_state(model))
        assert set(system.matrices) == {"A_cond", "A_cvi_lin", "A_cve", "A_lwe", "A_lwi", "A_airflow", "A_connex"}
        assert "B_hvac" in system.vectors and "B_cvi_nlin" in system.vectors

    def test_internal_gain_radiative_split(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        system = assemble_zone(
            model, boundary(internal_gain=1000.0, internal_radiative_fraction=0.4), {}, initial_state(model)
        )
        load = system.vectors["B_int_load"]
        assert load[0] == pytest.approx(600.0)
        assert load.sum() == pytest.approx(1000.0)

    def test_steady_state_energy_closure(self, one_zone):
        model = build_zone_models(one_zone)["room"]
        bc = boundary(20.0, internal_gain=500.0, exterior_inflow=0.01)
        temperatures = initial_state(model)
        for _ in range(60):
            system = assemble_zone(model, bc, {}, temperatures)
            temperatures = step_implicit(system, 1.0e6)
        system = assemble_zone(model, bc, {}, temperatures)
        assert abs(system.residual(temperatures).sum()) < 0.5
        assert temperatures[0] > 20.0

    def test_linearization_reproduces_power_law_at_estimate(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        estimate = initial_state(model)
        surface = next(s for s in model.surfaces if s.component == "wall_n")
        estimate[surface.index] = 24.0
        system = assemble_zone(model, boundary(), {}, initial_state(model), linearization=estimate)
        flux_into_surface = (system.matrices["A_cvi_lin"] @ estimate + system.vectors["B_cvi_nlin"])[surface.index]
        expected = -1.31 * 4.0 ** (1.0 / 3.0) * surface.area * 4.0
        assert flux_into_surface == pytest.approx(expected, rel=1e-12)
        assert not system.vectors["B_cvi_nlin"].any()

    def test_small_difference_uses_floor_coefficient(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        estimate = initial_state(model)
        surface = next(s for s in model.surfaces if s.component == "wall_n")
        estimate[surface.index] = 20.01
        system = assemble_zone(model, boundary(), {}, initial_state(model), linearization=estimate)
        i = surface.index
        assert system.matrices["A_cvi_lin"][i, i] == pytest.approx(-1.31 * 0.05 ** (1.0 / 3.0) * surface.area)
        assert system.vectors["B_cvi_nlin"][i] == 0.0


class TestImplicitStep:
    def test_single_air_node_example(self):
        system = ZoneSystem(
            zone="z", node_index={("z", "air"): 0}, labels=["z.air"], capacity=np.array([1.0e6]),
            matrices={"A_cond": np.array([[-10.0]])}, vectors={"B_cond": np.zeros(1)},
            temperatures=np.array([20.0]),
        )
        t1 = step_implicit(system, 3600.0)[0]
        assert t1 == pytest.approx(20.0 / 1.036, rel=1e-12)
        assert t1 == pytest.approx(19.305, abs=1e-3)

    def test_matches_fine_explicit_reference(self):
        system, _, _ = two_node_wall()
        a, b, c = system.A, system.B, system.capacity

        # explicit Euler at dt = 1 s as an affine map, raised to one hour
        step = np.eye(3)
        step[:2, :2] += a / c[:, None]
        step[:2, 2] = b / c
        hour = np.linalg.matrix_power(step, 3600)

        implicit = system.temperatures.copy()
        explicit = np.append(system.temperatures, 1.0)
        worst = 0.0
        for _ in range(24):
            system.temperatures = implicit
            implicit = step_implicit(system, 3600.0)
            explicit = hour @ explicit
            worst = max(worst, float(np.max(np.abs(implicit - explicit[:2]))))
        assert worst < 0.2

    def test_steady_state_flux(self):
        system, g_side, g_core = two_node_wall()
        for _ in range(20):
            system.temperatures = step_implicit(system, 1.0e8)
        flux = g_side * (25.0 - system.temperatures[1])
        u = 1.0 / (2.0 / g_side + 1.0 / g_core)
        assert flux == pytest.approx(u * 5.0, rel=1e-6)

    @pytest.mark.parametrize("dt", [1.0, 60.0, 3600.0, 86400.0])
    def test_unconditionally_stable_and_monotone(self, dt):
        system, _, _ = two_node_wall()
        previous = system.temperatures.copy()
        for _ in range(50):
            system.temperatures = step_implicit(system, dt)
            assert (system.temperatures >= previous - 1e-12).all()
            assert (system.temperatures <= 25.0 + 1e-9).all()
            previous = system.temperatures.copy()

    def test_unconnected_massless_node(self):
        system = ZoneSystem(
            zone="z", node_index={("z", "air"): 0}, labels=["z.air"], capacity=np.array([0.0]),
            matrices={"A_cond": np.zeros((1, 1))}, vectors={"B_cond": np.zeros(1)}, temperatures=np.zeros(1),
        )
        with pytest.raises(SingularSystemError) as excinfo:
            step_implicit(system, 3600.0)
        assert excinfo.value.node == "z.air"


class TestNonlinearIteration:
    def test_converges_in_a_few_iterations(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        previous = initial_state(model)
        solution = iterate_nonlinear_convection(
            model, boundary(30.0), {}, previous, previous, 3600.0, 1e-3, 25
        )
        assert 2 <= solution.iterations <= 10
        again = iterate_nonlinear_convection(
            model, boundary(30.0), {}, previous, solution.temperatures, 3600.0, 1e-3, 25
        )
        assert again.temperatures[0] == pytest.approx(solution.temperatures[0], abs=5e-3)

    def test_loose_criterion_needs_one_pass(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        previous = initial_state(model)
        solution = iterate_nonlinear_convection(model, boundary(30.0), {}, previous, previous, 3600.0, 10.0, 25)
        assert solution.iterations == 1

    def test_iteration_cap(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        previous = initial_state(model)
        with pytest.raises(ConvergenceError) as excinfo:
            iterate_nonlinear_convection(model, boundary(30.0), {}, previous, previous, 3600.0, 1e-3, 1)
        assert len(excinfo.value.history) == 1

    def test_rejects_non_positive_criterion(self):
        model = build_zone_models(parse_building(one_zone_document("nonlinear")))["room"]
        previous = initial_state(model)
        with pytest.raises(ValueError):
            iterate_nonlinear_convection(model, boundary(), {}, previous, previous, 3600.0, 0.0, 25)


class TestCoupling:
    def run(self, document, temperatures):
        models = build_zone_models(parse_building(document))
        previous = {name: np.full(m.size, temperatures[name]) for name, m in models.items()}
        boundaries = {name: boundary(20.0) for name in models}
        return models, couple_zones(models, boundaries, previous, 3600.0, 1e-3, 50, 1e-3, 25)

    def test_uncoupled_zones_converge_in_one_sweep(self):
        document = two_zone_adiabatic_document()
        document["interzones"] = [iz for iz in document["interzones"] if iz["name"] != "partition"]
        _, result = self.run(document, {"left": 25.0, "right": 15.0})
        assert result.sweeps == 1

    def test_partition_couples_zones(self):
        models, result = self.run(two_zone_adiabatic_document(), {"left": 25.0, "right": 15.0})
        assert result.sweeps >= 2
        left, right = result.states["left"], result.states["right"]
        # heat goes from the warm room to the cool one through the shared wall
        core_a = left[models["left"].node_index[("partition_wall", "core_a")]]
        core_b = right[models["right"].node_index[("partition_wall", "core_b")]]
        assert core_a > core_b
        assert result.solve_counts == {"left": result.sweeps, "right": result.sweeps}

    def test_adiabatic_uniform_state_is_kept(self):
        _, result = self.run(two_zone_adiabatic_document(), {"left": 20.0, "right": 20.0})
        for state in result.states.values():
            np.testing.assert_allclose(state, 20.0, atol=1e-9)

    @pytest.mark.parametrize("model", ["constant_h", "nonlinear"])
    def test_case_study_converges_within_twenty_sweeps(self, case_study, two_day_weather, model):
        building = apply_case(case_study, {zone: model for zone in case_study.zone_names})
        _, timing = SimulationEngine(building, two_day_weather, options=SolverOptions(warmup_days=0)).run()
        assert len(timing.sweeps) == 48
        assert max(timing.sweeps) <= 20

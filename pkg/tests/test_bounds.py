import numpy as np
import pytest
from hypothesis import given, settings

from mse.bounds import (
    BoundNotApplicableError,
    LpProblem,
    build_compatible_lp,
    compute_bounds,
    lb_avg_load,
    lb_lp_compatible,
    lb_mixed_clusters,
    lb_pmax,
    lp_bound_sound,
    simplex_solve,
)
from mse.core import compatibility_clusters, instance_stats
from mse.instances import coefficient_preset
from tests.oraculo import alfa_uniforme, forca_bruta, instancia, instancias_pequenas

CENARIOS = ("compatible", "mixed", "incompatible", "clashing")

# α = 0 entre os tipos 0 e 1, mas ambos pesam 1 sobre o tipo 2
ALFA_SEM_DOMINANCIA = [[1, 0, 1], [0, 1, 1], [1, 1, 1]]


def _problema(objetivo, a_ub=None, b_ub=None, upper=None):
    n = len(objetivo)
    return LpProblem(
        objective=np.array(objetivo, dtype=float),
        a_ub=np.zeros((0, n)) if a_ub is None else np.array(a_ub, dtype=float),
        b_ub=np.zeros(0) if b_ub is None else np.array(b_ub, dtype=float),
        a_eq=np.zeros((0, n)),
        b_eq=np.zeros(0),
        upper=np.full(n, np.inf) if upper is None else np.array(upper, dtype=float),
    )


def _forma_fechada(inst):
    """Com máquinas idênticas a divisão uniforme é ótima no PL."""
    stats = instance_stats(inst)
    presentes = [t for t in range(inst.t_count) if stats.per_type_load[t] > 0]
    beta = np.minimum(1.0, inst.alpha.coeff)
    return max(
        sum(stats.per_type_load[t] * beta[t, u] for t in presentes) for u in presentes
    ) / inst.machines


class TestSimplex:
    def test_lp_trivial(self):
        solucao = simplex_solve(_problema([1], a_ub=[[-1]], b_ub=[-5]))
        assert solucao.success
        assert solucao.objective == pytest.approx(5)
        assert solucao.x[0] == pytest.approx(5)

    def test_limite_superior_vira_restricao(self):
        solucao = simplex_solve(_problema([-1, -2], upper=[3, 4]))
        assert solucao.objective == pytest.approx(-11)

    def test_inviavel(self):
        solucao = simplex_solve(_problema([1], a_ub=[[-1]], b_ub=[-2], upper=[1]))
        assert solucao.status == "infeasible"
        assert not solucao.success
        assert solucao.x is None

    def test_ilimitado(self):
        assert simplex_solve(_problema([-1])).status == "unbounded"

    def test_limite_de_iteracoes(self):
        inst = instancia([(2, 0)] * 3 + [(2, 1)] * 3, coefficient_preset(2, "compatible"), 1)
        problema, _ = build_compatible_lp(inst)
        assert simplex_solve(problema, max_iter=1).status == "iteration-limit"

    def test_igualdade(self):
        problema = LpProblem(
            objective=np.array([1.0, 2.0]),
            a_ub=np.zeros((0, 2)),
            b_ub=np.zeros(0),
            a_eq=np.array([[1.0, 1.0]]),
            b_eq=np.array([1.0]),
            upper=np.array([np.inf, np.inf]),
        )
        solucao = simplex_solve(problema)
        assert solucao.objective == pytest.approx(1)
        assert list(solucao.x) == pytest.approx([1, 0])


class TestLbPmax:
    def test_maior_tarefa(self):
        assert lb_pmax(instancia([(4, 0), (3, 0), (2, 0)], [[1]], 2)) == 4

    def test_tarefa_unica(self):
        assert lb_pmax(instancia([(7, 0)], [[1]], 3)) == 7

    def test_diagonal_multiplica(self):
        assert lb_pmax(instancia([(7, 0), (5, 1)], [[2, 1], [1, 1]], 1)) == 14


class TestLbAvgLoad:
    def test_carga_media(self):
        assert lb_avg_load(instancia([(4, 0), (3, 0), (2, 0)], [[1]], 2)) == pytest.approx(4.5)

    def test_recusa_compativel(self):
        inst = instancia([(4, 0), (2, 1)], coefficient_preset(2, "compatible"), 2)
        with pytest.raises(BoundNotApplicableError, match="α >= 1"):
            lb_avg_load(inst)


class TestLbLpCompatible:
    def test_exemplo_dois_tipos(self):
        inst = instancia([(3, 0), (3, 0), (3, 1), (3, 1)], coefficient_preset(2, "compatible"), 2)
        assert lb_lp_compatible(inst) == pytest.approx(4.5, abs=1e-6)

    def test_um_tipo_vira_carga_media(self):
        inst = instancia([(4, 0), (3, 0), (2, 0)], [[1]], 2)
        assert lb_lp_compatible(inst) == pytest.approx(4.5, abs=1e-6)

    def test_uma_maquina(self):
        inst = instancia([(4, 0), (2, 1), (2, 2)], coefficient_preset(3, "compatible"), 1)
        # tipo 0 recebe 4 + 0,5·2 + 0,25·2 = 5,5
        assert lb_lp_compatible(inst) == pytest.approx(5.5, abs=1e-6)

    def test_tipo_ausente_fica_fora_do_pl(self):
        inst = instancia([(4, 0), (2, 2)], coefficient_preset(3, "compatible"), 2)
        problema, escala = build_compatible_lp(inst)
        assert escala == 4
        assert problema.n_vars == 2 * 2 + 1
        assert problema.a_ub.shape == (4, 5)

    def test_falha_devolve_none(self, caplog):
        inst = instancia([(2, 0)] * 3 + [(2, 1)] * 3, coefficient_preset(2, "compatible"), 1)
        assert lb_lp_compatible(inst, max_iter=1) is None
        assert "PL do limitante falhou" in caplog.text

    def test_matriz_sem_dominancia(self):
        inst = instancia([(10, 0), (10, 1), (1, 2)], ALFA_SEM_DOMINANCIA, 2)
        assert not lp_bound_sound(inst)
        with pytest.raises(BoundNotApplicableError):
            lb_lp_compatible(inst)

    @pytest.mark.parametrize("t_count", [2, 3, 4])
    def test_presets_compativeis_sao_validos(self, t_count):
        tipos = [(1, t) for t in range(t_count)]
        assert lp_bound_sound(instancia(tipos, coefficient_preset(t_count, "compatible"), 2))

    @given(instancias_pequenas(max_n=8, max_m=4, t_values=(2, 3, 4), scenarios=("compatible",)))
    @settings(max_examples=50, deadline=None)
    def test_forma_fechada(self, inst):
        assert lb_lp_compatible(inst) == pytest.approx(_forma_fechada(inst), rel=1e-6, abs=1e-6)


class TestLbMixedClusters:
    def test_um_grupo_igual_ao_pl(self):
        inst = instancia([(3, 0), (5, 1), (2, 1)], coefficient_preset(2, "compatible"), 2)
        assert lb_mixed_clusters(inst) == pytest.approx(lb_lp_compatible(inst))

    def test_maior_entre_grupos(self):
        inst = instancia([(6, 0), (6, 1), (2, 2)], coefficient_preset(3, "mixed"), 1)
        assert compatibility_clusters(inst.alpha).cluster_count == 2
        assert lb_mixed_clusters(inst) == pytest.approx(9, abs=1e-6)

    def test_grupo_sem_tarefas_ignorado(self):
        inst = instancia([(6, 0), (6, 1)], coefficient_preset(3, "mixed"), 1)
        assert lb_mixed_clusters(inst) == pytest.approx(9, abs=1e-6)


class TestComputeBounds:
    def test_fonte_avg(self):
        inst = instancia([(4, 0), (4, 1), (4, 0)], coefficient_preset(2, "incompatible"), 2)
        relatorio = compute_bounds(inst)
        assert relatorio.source == "avg"
        assert relatorio.chosen == pytest.approx(6)
        assert relatorio.lp_bound is None

    def test_empate_fica_com_pmax(self):
        relatorio = compute_bounds(instancia([(4, 0), (4, 0)], [[1]], 2))
        assert relatorio.avg_load_bound == pytest.approx(4)
        assert relatorio.source == "pmax"

    def test_fonte_lp(self):
        inst = instancia([(2, 0)] * 3 + [(2, 1)] * 3, coefficient_preset(2, "compatible"), 1)
        relatorio = compute_bounds(inst)
        assert relatorio.source == "lp"
        assert relatorio.chosen == pytest.approx(9, abs=1e-6)
        assert relatorio.avg_load_bound is None

    def test_fonte_lp_clusters(self):
        inst = instancia([(6, 0), (6, 1), (2, 2)], coefficient_preset(3, "mixed"), 1)
        relatorio = compute_bounds(inst)
        assert relatorio.source == "lp-clusters"
        assert relatorio.chosen == pytest.approx(9, abs=1e-6)

    def test_falha_do_pl_cai_para_pmax(self):
        inst = instancia([(2, 0)] * 3 + [(2, 1)] * 3, coefficient_preset(2, "compatible"), 1)
        relatorio = compute_bounds(inst, max_iter=1)
        assert relatorio.lp_failed
        assert relatorio.source == "pmax"
        assert relatorio.chosen == 2

    def test_pl_omitido_sem_dominancia(self):
        inst = instancia([(10, 0), (10, 1), (1, 2)], ALFA_SEM_DOMINANCIA, 2)
        relatorio = compute_bounds(inst)
        assert not relatorio.lp_failed
        assert relatorio.lp_bound is None
        assert relatorio.source == "pmax"
        assert relatorio.chosen <= forca_bruta(inst)

    @given(instancias_pequenas(max_n=6, max_m=3, t_values=(1, 2, 3), scenarios=CENARIOS))
    @settings(max_examples=80, deadline=None)
    def test_limitante_nunca_passa_do_otimo(self, inst):
        assert compute_bounds(inst).chosen <= forca_bruta(inst) + 1e-9

    @given(instancias_pequenas(max_n=6, max_m=3, t_values=(2, 3)))
    @settings(max_examples=60, deadline=None)
    def test_limitante_valido_com_alfa_uniforme(self, inst):
        assert compute_bounds(inst).chosen <= forca_bruta(inst) + 1e-9

    def test_alfa_zero_entre_tipos(self):
        inst = instancia([(5, 0), (5, 1)], alfa_uniforme(2, 0.0), 1)
        relatorio = compute_bounds(inst)
        assert relatorio.chosen == pytest.approx(5, abs=1e-6)

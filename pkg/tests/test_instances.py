import io

import numpy as np
import pytest

from mse.core import AlphaMatrix
from mse.instances import (
    GridSpec,
    GridSpecError,
    PresetError,
    SamplingError,
    TraceParseError,
    TraceRecord,
    TypedRecord,
    assign_types,
    cell_feasible,
    clique_partition_instance,
    coefficient_preset,
    experiment_grid,
    ingest_trace,
    materialize,
    normalize_records,
    reference_grids,
    partition_hard_instance,
    quantize_load,
    sample_instance,
    synthetic_pool,
    typed_pool,
)
from tests.oraculo import forca_bruta


def _csv(texto):
    return io.StringIO(texto)


class TestIngestTrace:
    def test_filtra_registros_infimos(self):
        registros = ingest_trace(_csv("1,1\n0.5,0.25\n0.001,0.002\n"))
        assert registros == [TraceRecord(1.0, 1.0), TraceRecord(0.5, 0.25)]

    def test_cabecalho_opcional(self):
        registros = ingest_trace(_csv("cpu,memory\n1,1\n0.5,0.25\n"))
        assert len(registros) == 2

    def test_normaliza_pelo_maximo_de_cada_coluna(self):
        registros = ingest_trace(_csv("2,4\n1,1\n"))
        assert registros[0] == TraceRecord(1.0, 1.0)
        assert registros[1] == TraceRecord(0.5, 0.25)

    def test_valor_nao_numerico(self):
        with pytest.raises(TraceParseError) as info:
            ingest_trace(_csv("1,1\nabc,0.5\n"))
        assert info.value.row == 2
        assert "Linha 2" in str(info.value)

    def test_numero_da_linha_conta_cabecalho(self):
        with pytest.raises(TraceParseError) as info:
            ingest_trace(_csv("cpu,memory\n1,1\nx,2\n"))
        assert info.value.row == 3

    def test_valor_negativo(self):
        with pytest.raises(TraceParseError, match="não negativos"):
            ingest_trace(_csv("1,1\n-0.5,0.5\n"))

    def test_colunas_erradas(self):
        with pytest.raises(TraceParseError, match="2 colunas"):
            ingest_trace(_csv("1,1,1\n2,2,2\n"))

    def test_arquivo_vazio(self):
        assert ingest_trace(_csv("")) == []

    def test_le_de_arquivo(self, tmp_path):
        caminho = tmp_path / "trace.csv"
        caminho.write_text("cpu,memory\n0.4,0.2\n", encoding="utf-8")
        assert ingest_trace(caminho) == [TraceRecord(1.0, 1.0)]


class TestNormalizeRecords:
    def test_lista_vazia(self):
        assert normalize_records([]) == []

    def test_coluna_toda_zero(self):
        registros = normalize_records([TraceRecord(1.0, 0.0), TraceRecord(0.5, 0.0)])
        assert registros == [TraceRecord(1.0, 0.0), TraceRecord(0.5, 0.0)]


class TestQuantizeLoad:
    @pytest.mark.parametrize("registro, esperado", [
        (TraceRecord(0.5, 0.1), 50),
        (TraceRecord(0.001, 0.005), 1),
        (TraceRecord(1.0, 0.2), 100),
        (TraceRecord(0.2, 0.125), 20),
        (TraceRecord(0.125, 0.1), 13),
    ])
    def test_carga(self, registro, esperado):
        assert quantize_load(registro) == esperado

    def test_minimo_um(self):
        assert quantize_load(TraceRecord(0.0, 0.001)) == 1


class TestAssignTypes:
    def test_t2_memoria_dominante(self):
        assert assign_types([TraceRecord(0.2, 0.4)], 2)[0].type_id == 0

    def test_t2_limiar_fica_embaixo(self):
        assert assign_types([TraceRecord(0.3, 0.3)], 2)[0].type_id == 0

    def test_t2_cpu_dominante(self):
        assert assign_types([TraceRecord(0.4, 0.2)], 2)[0].type_id == 1

    def test_t3_razao_um(self):
        assert assign_types([TraceRecord(0.3, 0.3)], 3)[0].type_id == 1

    def test_t4_log_menor_que_limiar(self):
        assert assign_types([TraceRecord(10 ** -0.7, 1.0)], 4)[0].type_id == 0

    def test_t4_extremo_cpu(self):
        assert assign_types([TraceRecord(1.0, 0.1)], 4)[0].type_id == 3

    def test_memoria_zero_vai_para_ultimo_tipo(self):
        for t_count in (2, 3, 4):
            assert assign_types([TraceRecord(0.5, 0.0)], t_count)[0].type_id == t_count - 1

    def test_t1_tudo_tipo_zero(self):
        tipados = assign_types([TraceRecord(0.5, 0.1), TraceRecord(0.1, 0.5)], 1)
        assert [r.type_id for r in tipados] == [0, 0]

    def test_base_do_log(self):
        # log2(1,6) ≈ 0,68 passa do limiar; log10(1,6) ≈ 0,20 não passa
        registro = [TraceRecord(0.8, 0.5)]
        assert assign_types(registro, 3, log_base=2.0)[0].type_id == 2
        assert assign_types(registro, 3, log_base=10.0)[0].type_id == 1

    def test_t_invalido(self):
        with pytest.raises(PresetError):
            assign_types([TraceRecord(0.5, 0.5)], 5)

    def test_carga_quantizada_junto(self):
        assert assign_types([TraceRecord(0.5, 0.1)], 2) == [TypedRecord(50, 1)]


class TestCoefficientPreset:
    def test_compatible_t2(self):
        assert coefficient_preset(2, "compatible") == AlphaMatrix.from_rows([[1, 0.5], [0.5, 1]])

    def test_clashing_t3(self):
        alpha = coefficient_preset(3, "clashing")
        assert alpha[0, 2] == 3
        assert alpha.integral

    def test_mixed_t4(self):
        alpha = coefficient_preset(4, "mixed")
        assert alpha[0, 1] == 0.5
        assert alpha[1, 3] == 2

    @pytest.mark.parametrize("cenario", ["compatible", "mixed", "incompatible", "clashing"])
    def test_diagonal_normalizada(self, cenario):
        for t_count in (3, 4):
            assert coefficient_preset(t_count, cenario).normalized

    def test_mixed_t2_nao_existe(self):
        with pytest.raises(PresetError, match="mixed"):
            coefficient_preset(2, "mixed")

    def test_cenario_desconhecido(self):
        with pytest.raises(PresetError, match="Opções"):
            coefficient_preset(2, "amigavel")


class TestSampleInstance:
    POOL = [TypedRecord(5, 0)] * 10 + [TypedRecord(7, 1)]

    def test_repara_tipo_ausente(self):
        for semente in range(20):
            inst = sample_instance(self.POOL, 3, 2, 2, coefficient_preset(2, "compatible"),
                                   np.random.default_rng(semente))
            assert inst.n == 3
            assert set(inst.types.tolist()) == {0, 1}

    def test_deterministica(self):
        alpha = coefficient_preset(2, "clashing")
        a = sample_instance(self.POOL, 4, 2, 2, alpha, np.random.default_rng(11))
        b = sample_instance(self.POOL, 4, 2, 2, alpha, np.random.default_rng(11))
        assert a == b

    def test_com_reposicao_quando_pool_pequeno(self):
        pool = [TypedRecord(3, 0), TypedRecord(4, 1)]
        inst = sample_instance(pool, 5, 2, 2, coefficient_preset(2, "compatible"),
                               np.random.default_rng(0))
        assert inst.n == 5

    def test_uma_tarefa_um_tipo(self):
        inst = sample_instance([TypedRecord(9, 0)], 1, 1, 1, AlphaMatrix.from_rows([[1]]),
                               np.random.default_rng(0))
        assert list(inst.sizes) == [9]

    def test_n_menor_que_t(self):
        with pytest.raises(SamplingError, match="n=1"):
            sample_instance(self.POOL, 1, 2, 2, coefficient_preset(2, "compatible"),
                            np.random.default_rng(0))

    def test_pool_sem_um_tipo(self):
        with pytest.raises(SamplingError, match="tipo 1"):
            sample_instance([TypedRecord(5, 0)] * 4, 3, 2, 2, coefficient_preset(2, "compatible"),
                            np.random.default_rng(0))

    def test_pool_vazio(self):
        with pytest.raises(SamplingError, match="vazio"):
            sample_instance([], 3, 2, 2, coefficient_preset(2, "compatible"),
                            np.random.default_rng(0))

    @pytest.mark.parametrize("t_count", [2, 3, 4])
    def test_proporcoes_de_tipo_acompanham_o_pool(self, t_count):
        pool = typed_pool(normalize_records(synthetic_pool(20_000, seed=2017)), t_count)
        esperado = np.bincount([r.type_id for r in pool], minlength=t_count) / len(pool)
        alpha = coefficient_preset(t_count, "compatible")
        rng = np.random.default_rng(2017)
        amostras = [
            np.bincount(sample_instance(pool, 1000, t_count, 5, alpha, rng).types, minlength=t_count) / 1000
            for _ in range(5)
        ]
        np.testing.assert_allclose(np.mean(amostras, axis=0), esperado, atol=0.05)


class TestSyntheticPool:
    def test_deterministico(self):
        assert synthetic_pool(200, seed=5) == synthetic_pool(200, seed=5)
        assert synthetic_pool(200, seed=5) != synthetic_pool(200, seed=6)

    def test_proporcao_filtrada(self):
        bruto = synthetic_pool(10_000, seed=2017)
        mantidos = normalize_records(bruto)
        assert 0.40 <= 1 - len(mantidos) / len(bruto) <= 0.50

    def test_todos_os_tipos_aparecem(self):
        pool = typed_pool(normalize_records(synthetic_pool(10_000, seed=2017)), 4)
        assert {r.type_id for r in pool} == {0, 1, 2, 3}
        assert all(1 <= r.load <= 100 for r in pool)


class TestGridSpec:
    def test_from_dict(self):
        grade = GridSpec.from_dict({"size_class": "x", "n": [10], "m": [2, 3], "T": [2], "seed": 4})
        assert grade.n_values == (10,)
        assert grade.m_values == (2, 3)
        assert grade.repetitions == 30
        assert GridSpec.from_dict(grade.to_dict()) == grade

    def test_campo_desconhecido(self):
        with pytest.raises(GridSpecError, match="replicas"):
            GridSpec.from_dict({"n": [10], "m": [2], "replicas": 3})

    def test_campo_ausente(self):
        with pytest.raises(GridSpecError, match="ausente"):
            GridSpec.from_dict({"m": [2]})

    def test_valor_invalido(self):
        with pytest.raises(GridSpecError, match="inválido"):
            GridSpec.from_dict({"n": ["dez"], "m": [2]})

    @pytest.mark.parametrize("documento", [[10, 2], "small", None])
    def test_documento_que_nao_e_objeto(self, documento):
        with pytest.raises(GridSpecError, match="objeto JSON"):
            GridSpec.from_dict(documento)

    def test_validacao_acumula_problemas(self):
        with pytest.raises(GridSpecError) as info:
            GridSpec("x", (), (2,), t_values=(5,), scenarios=("amigavel",))
        mensagem = str(info.value)
        assert "n deve" in mensagem
        assert "T deve" in mensagem
        assert "amigavel" in mensagem


class TestExperimentGrid:
    def test_celulas_inviaveis_excluidas(self):
        assert not cell_feasible("clashing", 3, 2)
        assert not cell_feasible("incompatible", 4, 3)
        assert not cell_feasible("mixed", 2, 10)
        assert cell_feasible("compatible", 4, 2)
        assert cell_feasible("clashing", 2, 2)

    def test_contagem_de_celulas(self):
        descritores = experiment_grid(GridSpec("small", (10,), (2,), repetitions=1))
        celulas = {d.cell_id for d in descritores}
        assert len(celulas) == 7
        assert "small-mixed-T3-n10-m2" in celulas
        assert "small-clashing-T3-n10-m2" not in celulas

    def test_grades_completas(self):
        pequena, grande = reference_grids()
        assert len(experiment_grid(pequena)) + len(experiment_grid(grande)) == 6390

    def test_sementes_distintas_e_estaveis(self):
        grade = GridSpec("small", (10,), (2,), t_values=(2,), scenarios=("compatible",), repetitions=5)
        sementes = [d.seed for d in experiment_grid(grade)]
        assert len(set(sementes)) == 5
        assert sementes == [d.seed for d in experiment_grid(grade)]

    def test_semente_mestra_muda_tudo(self):
        base = dict(size_class="small", n_values=(10,), m_values=(2,), t_values=(2,),
                    scenarios=("compatible",), repetitions=3)
        a = experiment_grid(GridSpec(**base, seed=1))
        b = experiment_grid(GridSpec(**base, seed=2))
        assert all(x.seed != y.seed for x, y in zip(a, b))

    def test_materialize(self):
        pool = typed_pool(normalize_records(synthetic_pool(2000, seed=3)), 3)
        descritor = experiment_grid(GridSpec("small", (20,), (3,), t_values=(3,),
                                             scenarios=("mixed",), repetitions=1))[0]
        inst, meta = materialize(descritor, pool)
        assert inst.n == 20
        assert inst.machines == 3
        assert set(inst.types.tolist()) == {0, 1, 2}
        assert inst.alpha == coefficient_preset(3, "mixed")
        assert meta == {"scenario": "mixed", "T": 3, "n": 20, "m": 3,
                        "seed": descritor.seed, "cell_id": descritor.cell_id}
        assert materialize(descritor, pool)[0] == inst


class TestFamiliasDificeis:
    def test_particao_perfeita(self):
        inst = partition_hard_instance([3, 1, 2, 2])
        assert inst.machines == 2
        assert inst.t_count == 4
        assert forca_bruta(inst) == 4

    def test_particao_impossivel(self):
        # soma 7: o melhor lado tem 4
        assert forca_bruta(partition_hard_instance([3, 3, 1])) == 4

    def test_particao_valores_invalidos(self):
        with pytest.raises(PresetError):
            partition_hard_instance([3, 0])

    def test_cliques_cobrem_o_grafo(self):
        inst = clique_partition_instance(4, [(0, 1), (2, 3)], 2, r=2.0)
        assert forca_bruta(inst) == 1

    def test_sem_cobertura_custa_r_mais_um(self):
        inst = clique_partition_instance(3, [], 2, r=2.0)
        assert forca_bruta(inst) >= 3

    def test_aresta_invalida(self):
        with pytest.raises(PresetError, match="Aresta"):
            clique_partition_instance(3, [(0, 3)], 2, r=2.0)

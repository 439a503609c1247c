import json

import pytest

from main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from tests.conftest import MOVIE_TEXT, PROGRAMS_DIR, RULES_DIR


def program(name):
    return str(PROGRAMS_DIR / f"{name}.spanner")


def rules(name):
    return str(RULES_DIR / name)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus")
    assert main(["gen-corpus", "--seed", "3", "--count", "6", "--out", str(path)]) == EXIT_OK
    return path


def test_gen_corpus(corpus):
    assert sorted(p.name for p in corpus.iterdir()) == [f"{i}.xml" for i in (1, 2, 3, 4, 5, 6)]
    assert (corpus / "1.xml").read_text(encoding="utf-8").startswith('<RECORD ID="1">')


def test_verify_stable_and_unstable(tmp_path, capsys):
    code = main(["verify", "--program", program("date"), "--rules", rules("dates.yaml"), "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith("E_date: stable")
    assert (tmp_path / "report.txt").read_text(encoding="utf-8").rstrip().endswith("overall: stable")

    code = main(["verify", "--program", program("order"), "--out", str(tmp_path), "--report", "json"])
    assert code == EXIT_FAILED
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["program"] == "E_order"
    assert report["overall"] == "not-verified"
    assert report["conditions"]["non-expanding"]["result"] == "fail"


def test_verify_program_errors(tmp_path, capsys):
    assert main(["verify", "--program", str(tmp_path / "absent.spanner"), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "syntax: cannot read" in capsys.readouterr().err

    bad = tmp_path / "bad.spanner"
    bad.write_text("output E = ⟦Σ* D{[0-9]} Σ*⟧\n", encoding="utf-8")
    assert main(["verify", "--program", str(bad), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "bad.spanner:1: syntax:" in capsys.readouterr().err


def test_verify_rule_for_unknown_variable(tmp_path, capsys):
    code = main(["verify", "--program", program("date"), "--rules", rules("movie.tsv"), "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_clean_dates_round_trip(corpus, tmp_path):
    out = tmp_path / "first"
    code = main(["clean", "--program", program("date"), "--corpus", str(corpus),
                 "--rules", rules("dates.yaml"), "--out", str(out)])
    assert code == EXIT_OK
    round_trip = json.loads((out / "roundtrip.json").read_text(encoding="utf-8"))
    assert round_trip["result"] == "exact match"
    assert round_trip["updates"] > 0
    assert round_trip["documents"] == {}
    assert len((out / "updates.tsv").read_text(encoding="utf-8").splitlines()) == round_trip["updates"] + 1
    assert sorted(p.name for p in (out / "corpus-v1").iterdir()) == sorted(p.name for p in corpus.iterdir())

    # повторная очистка уже нормализованного корпуса ничего не меняет
    again = tmp_path / "second"
    code = main(["clean", "--program", program("date"), "--corpus", str(out / "corpus-v1"),
                 "--rules", rules("dates.yaml"), "--out", str(again)])
    assert code == EXIT_OK
    assert json.loads((again / "roundtrip.json").read_text(encoding="utf-8"))["updates"] == 0
    assert (again / "updates.tsv").read_text(encoding="utf-8") == "Doc_id\tcolumn\tspan\told\tnew\n"
    first = sorted((out / "corpus-v1").iterdir())
    second = sorted((again / "corpus-v1").iterdir())
    assert [p.name for p in second] == [p.name for p in first]
    for a, b in zip(first, second):
        assert b.read_text(encoding="utf-8") == a.read_text(encoding="utf-8"), a.name


def test_clean_from_saved_table(corpus, tmp_path, capsys):
    extracted = tmp_path / "extracted"
    assert main(["extract", "--program", program("date"), "--corpus", str(corpus), "--out", str(extracted)]) == EXIT_OK
    out = tmp_path / "out"
    code = main(["clean", "--program", program("date"), "--corpus", str(corpus), "--rules", rules("dates.yaml"),
                 "--table", str(extracted / "table.tsv"), "--out", str(out)])
    assert code == EXIT_OK
    assert json.loads((out / "roundtrip.json").read_text(encoding="utf-8"))["result"] == "exact match"
    direct = tmp_path / "direct"
    assert main(["clean", "--program", program("date"), "--corpus", str(corpus), "--rules", rules("dates.yaml"),
                 "--out", str(direct)]) == EXIT_OK
    assert (out / "updates.tsv").read_text(encoding="utf-8") == (direct / "updates.tsv").read_text(encoding="utf-8")

    other = tmp_path / "age"
    assert main(["extract", "--program", program("age"), "--corpus", str(corpus), "--out", str(other)]) == EXIT_OK
    capsys.readouterr()
    code = main(["clean", "--program", program("date"), "--corpus", str(corpus), "--rules", rules("dates.yaml"),
                 "--table", str(other / "table.tsv"), "--out", str(tmp_path / "mismatch")])
    assert code == EXIT_USAGE
    assert "do not match E_date" in capsys.readouterr().err


def test_clean_refuses_unverified_program(corpus, tmp_path, capsys):
    code = main(["clean", "--program", program("order"), "--corpus", str(corpus), "--out", str(tmp_path)])
    assert code == EXIT_FAILED
    assert "refusing to translate updates" in capsys.readouterr().err
    assert (tmp_path / "report.txt").exists()
    assert not (tmp_path / "updates.tsv").exists()

    forced = tmp_path / "forced"
    code = main(["clean", "--program", program("order"), "--corpus", str(corpus), "--out", str(forced), "--force"])
    assert code == EXIT_OK
    assert (forced / "corpus-v1").is_dir()


def test_clean_movie_mapping(tmp_path):
    corpus = tmp_path / "reviews"
    corpus.mkdir()
    (corpus / "movie.txt").write_text(MOVIE_TEXT, encoding="utf-8")
    out = tmp_path / "out"
    code = main(["clean", "--program", program("movie"), "--corpus", str(corpus), "--format", "plain-dir",
                 "--rules", rules("movie.tsv"), "--out", str(out), "--force"])
    assert code == EXIT_OK
    cleaned = (out / "corpus-v1" / "movie.xml").read_text(encoding="utf-8")
    assert "`Men in Black'." in cleaned
    assert len(cleaned) == 113


def test_extract_writes_tables(corpus, tmp_path):
    assert main(["extract", "--program", program("age"), "--corpus", str(corpus), "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "table.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "Doc_id\tA"
    assert len(lines) == 7
    assert (tmp_path / "strings.tsv").read_text(encoding="utf-8").startswith("Doc_id\tA\n")


def test_extract_empty_corpus(tmp_path):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    out = tmp_path / "out"
    assert main(["extract", "--program", program("date"), "--corpus", str(corpus), "--out", str(out)]) == EXIT_OK
    assert (out / "table.tsv").read_text(encoding="utf-8") == "Doc_id\tD\n"


def test_fuzz_writes_report(tmp_path):
    code = main(["fuzz", "--program", program("date"), "--rules", rules("dates.yaml"),
                 "--count", "4", "--trials", "25", "--seed", "11", "--out", str(tmp_path)])
    assert code == EXIT_OK
    result = json.loads((tmp_path / "fuzz.json").read_text(encoding="utf-8"))
    assert result["trials"] == 25
    assert result["violations"] == []


def test_missing_corpus(tmp_path, capsys):
    code = main(["extract", "--program", program("date"), "--corpus", str(tmp_path / "none"), "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "no such file or directory" in capsys.readouterr().err

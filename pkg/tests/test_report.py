import xml.etree.ElementTree as ET

from kacim.report import ExperimentReport, line_chart_svg


def test_json_round_trip(tmp_path):
    r = ExperimentReport("x", {"a": 1, "b": [1.5, 2]}, ["p", "q"], [{"p": 0.1, "q": "s,t"}], {"m": 2.0}, 1.25)
    back = ExperimentReport.from_json(r.to_json())
    assert back == r
    paths = r.write(tmp_path)
    assert paths["csv"].read_text() == 'p,q\n0.1,"s,t"\n'
    assert ExperimentReport.from_json(paths["json"].read_text()) == r


def test_floats_keep_full_precision():
    r = ExperimentReport("x", {}, ["v"], [{"v": 1 / 3}])
    assert float(r.rows_csv().splitlines()[1]) == 1 / 3


def test_svg_is_well_formed():
    svg = line_chart_svg({"a<b": ([1, 2, 4], [0.1, 0.2, 0.15], [0.01, 0.0, 0.02]), "c": ([1], [0.3], [0.0])},
                         "t & u", "x", "y", log_x=True)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2

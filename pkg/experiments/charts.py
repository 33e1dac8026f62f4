"""Log-log SVG charts of the experiment ladders."""
import logging
import math
from typing import NamedTuple

from reportlab.graphics import renderSVG
from reportlab.graphics.charts.legends import Legend
from reportlab.graphics.charts.lineplots import LinePlot
from reportlab.graphics.shapes import Drawing, String
from reportlab.graphics.widgets.markers import makeMarker
from reportlab.lib import colors

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 480, 320
PALETTE = [colors.HexColor('#283593'), colors.HexColor('#c62828'), colors.HexColor('#2e7d32'), colors.grey]


class ChartSeries(NamedTuple):
    label: str
    scales: tuple
    values: tuple
    fitted: bool = False


def fitted_series(label, scales, exponent, intercept):
    """The line log N = exponent · log(1/δ) + intercept over ``scales``."""
    return ChartSeries(label, tuple(scales), tuple(math.exp(exponent * -math.log(d) + intercept) for d in scales), True)


def _points(series):
    return [
        (math.log10(1.0 / delta), math.log10(value))
        for delta, value in zip(series.scales, series.values)
        if delta > 0 and value > 0
    ]


def loglog_chart(path, title, series, y_label='log10 N'):
    """Plot every series as log10 value against log10(1/δ); returns the path or None."""
    data = [(s, _points(s)) for s in series]
    data = [(s, points) for s, points in data if points]
    if sum(len(points) for _, points in data) < 2:
        logger.info(f'{title}: not enough positive values to chart')
        return None

    drawing = Drawing(WIDTH, HEIGHT)
    plot = LinePlot()
    plot.x, plot.y = 60, 50
    plot.width, plot.height = WIDTH - 170, HEIGHT - 100
    plot.data = [points for _, points in data]
    for index, (s, _) in enumerate(data):
        line = plot.lines[index]
        line.strokeColor = PALETTE[index % len(PALETTE)]
        if s.fitted:
            line.strokeDashArray = [4, 3]
        else:
            line.symbol = makeMarker('FilledCircle')
            line.symbol.size = 4
            line.symbol.fillColor = line.strokeColor
    plot.xValueAxis.labelTextFormat = '%.2f'
    plot.yValueAxis.labelTextFormat = '%.2f'
    drawing.add(plot)

    legend = Legend()
    legend.x, legend.y = WIDTH - 100, HEIGHT - 60
    legend.fontName, legend.fontSize = 'Helvetica', 8
    legend.alignment = 'right'
    legend.colorNamePairs = [(PALETTE[i % len(PALETTE)], s.label) for i, (s, _) in enumerate(data)]
    drawing.add(legend)

    drawing.add(String(WIDTH / 2, HEIGHT - 25, title, textAnchor='middle', fontName='Helvetica-Bold', fontSize=12))
    drawing.add(String(plot.x + plot.width / 2, 15, 'log10(1/δ)', textAnchor='middle', fontName='Helvetica', fontSize=9))
    drawing.add(String(15, plot.y + plot.height + 10, y_label, fontName='Helvetica', fontSize=9))
    renderSVG.drawToFile(drawing, str(path))
    return path

"""PDF summary of one experiment run."""
from xml.sax.saxutils import escape

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from .verdicts import FAIL, PASS

HEADER_STYLE = [
    ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#283593')),
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 11),
    ('FONTSIZE', (0, 1), (-1, -1), 9),
    ('BOTTOMPADDING', (0, 0), (-1, 0), 12),
    ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
    ('GRID', (0, 0), (-1, -1), 1, colors.grey),
    ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.lightgrey]),
]

OUTCOME_COLORS = {PASS: colors.HexColor('#2e7d32'), FAIL: colors.HexColor('#c62828')}


def _value(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return f'{value:.6g}'
    return str(value)


def write_pdf_report(result, path):
    doc = SimpleDocTemplate(str(path), pagesize=A4, rightMargin=30, leftMargin=30, topMargin=30, bottomMargin=18)
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'ReportTitle',
        parent=styles['Heading1'],
        fontSize=22,
        textColor=colors.HexColor('#1a237e'),
        spaceAfter=24,
        alignment=TA_CENTER,
        fontName='Helvetica-Bold',
    )
    heading_style = ParagraphStyle(
        'ReportHeading',
        parent=styles['Heading2'],
        fontSize=14,
        textColor=colors.HexColor('#283593'),
        spaceAfter=12,
        spaceBefore=12,
        fontName='Helvetica-Bold',
    )

    elements = [
        Paragraph(f'Experiment report: {result.kind}', title_style),
        Paragraph(f'System: {result.system_name or "none"} &nbsp; Seed: {result.config["seed"]}', styles['Normal']),
        Spacer(1, 0.3 * inch),
        Paragraph('Verdicts', heading_style),
    ]

    verdict_rows = [['Check', 'Outcome', 'Measured', 'Bound']]
    verdict_rows += [[v.check, v.outcome, _value(v.measured), _value(v.bound)] for v in result.verdicts]
    verdict_table = Table(verdict_rows, colWidths=[2.2 * inch, 1.3 * inch, 1.5 * inch, 1.5 * inch])
    style = list(HEADER_STYLE)
    for row, verdict in enumerate(result.verdicts, start=1):
        if verdict.outcome in OUTCOME_COLORS:
            style.append(('TEXTCOLOR', (1, row), (1, row), OUTCOME_COLORS[verdict.outcome]))
    verdict_table.setStyle(TableStyle(style))
    elements.append(verdict_table)

    details = [v for v in result.verdicts if v.detail]
    if details:
        elements.append(Spacer(1, 0.2 * inch))
        for verdict in details:
            elements.append(Paragraph(f'<b>{verdict.check}</b>: {escape(verdict.detail)}', styles['Normal']))

    elements.append(Paragraph('Parameters', heading_style))
    parameter_rows = [['Field', 'Value']]
    parameter_rows += [[key, _value(value)] for key, value in sorted(result.config.items()) if value not in (None, '', [])]
    parameter_table = Table(parameter_rows, colWidths=[2.2 * inch, 4.3 * inch])
    parameter_table.setStyle(TableStyle(HEADER_STYLE))
    elements.append(parameter_table)

    if result.artifacts:
        elements.append(Paragraph('Artifacts', heading_style))
        for artifact in result.artifacts:
            elements.append(Paragraph(artifact.name, styles['Normal']))

    doc.build(elements)
    return path

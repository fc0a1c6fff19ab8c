from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.platypus import SimpleDocTemplate, Table, TableStyle, Paragraph, Spacer, Image
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import inch
from reportlab.lib.enums import TA_CENTER, TA_RIGHT
from matplotlib.figure import Figure
from datetime import datetime
from xml.sax.saxutils import escape
import io

ACCENT = '#2c5f2d'


class PDFReportGenerator:
    '''Base class for generating PDF reports'''

    def __init__(self, title, orientation='portrait'):
        self.title = title
        self.pagesize = A4 if orientation == 'portrait' else (A4[1], A4[0])
        self.styles = getSampleStyleSheet()
        self.elements = []

        self.title_style = ParagraphStyle(
            'CustomTitle',
            parent=self.styles['Heading1'],
            fontSize=22,
            textColor=colors.HexColor(ACCENT),
            spaceAfter=24,
            alignment=TA_CENTER,
        )
        self.heading_style = ParagraphStyle(
            'CustomHeading',
            parent=self.styles['Heading2'],
            fontSize=14,
            textColor=colors.HexColor(ACCENT),
            spaceAfter=12,
        )

    def add_header(self, heading='PrintSlice'):
        self.elements.append(Paragraph(f'<b>{heading}</b>', self.title_style))
        self.elements.append(Paragraph(escape(self.title), self.heading_style))

        date_style = ParagraphStyle(
            'DateStyle',
            parent=self.styles['Normal'],
            fontSize=10,
            textColor=colors.grey,
            alignment=TA_RIGHT,
        )
        date_text = f'Generated: {datetime.now().strftime("%d %B, %Y at %I:%M %p")}'
        self.elements.append(Paragraph(date_text, date_style))
        self.elements.append(Spacer(1, 0.3 * inch))

    def add_summary_boxes(self, summary_data):
        '''Two-column label/value table'''
        data = [[item['label'], item['value']] for item in summary_data]
        if not data:
            return
        table = Table(data, colWidths=[2.5 * inch, 2.5 * inch])
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (0, -1), colors.HexColor('#e9ecef')),
            ('BACKGROUND', (1, 0), (1, -1), colors.white),
            ('ALIGN', (0, 0), (0, -1), 'LEFT'),
            ('ALIGN', (1, 0), (1, -1), 'RIGHT'),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
            ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
            ('FONTNAME', (1, 0), (1, -1), 'Helvetica'),
            ('FONTSIZE', (0, 0), (-1, -1), 10),
            ('LEFTPADDING', (0, 0), (-1, -1), 10),
            ('RIGHTPADDING', (0, 0), (-1, -1), 10),
            ('TOPPADDING', (0, 0), (-1, -1), 8),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 8),
            ('GRID', (0, 0), (-1, -1), 1, colors.HexColor('#dee2e6')),
        ]))
        self.elements.append(table)
        self.elements.append(Spacer(1, 0.3 * inch))

    def add_table(self, headers, rows, col_widths=None):
        table = Table([headers] + list(rows), colWidths=col_widths, repeatRows=1)
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(ACCENT)),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
            ('ALIGN', (0, 0), (-1, 0), 'CENTER'),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, 0), 10),
            ('FONTNAME', (0, 1), (-1, -1), 'Helvetica'),
            ('FONTSIZE', (0, 1), (-1, -1), 9),
            ('ALIGN', (0, 1), (-1, -1), 'RIGHT'),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
            ('TOPPADDING', (0, 0), (-1, -1), 6),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 6),
            ('GRID', (0, 0), (-1, -1), 1, colors.HexColor('#dee2e6')),
            ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.HexColor('#f8f9fa')]),
        ]))
        self.elements.append(table)
        self.elements.append(Spacer(1, 0.3 * inch))

    def add_section_heading(self, text):
        self.elements.append(Paragraph(text, self.heading_style))
        self.elements.append(Spacer(1, 10))

    def add_figure(self, figure, width=6 * inch, height=3 * inch):
        '''Embed a matplotlib figure as a PNG'''
        image = io.BytesIO()
        figure.savefig(image, format='png', dpi=150, bbox_inches='tight')
        image.seek(0)
        self.elements.append(Image(image, width=width, height=height))
        self.elements.append(Spacer(1, 0.3 * inch))

    def generate(self, buffer):
        doc = SimpleDocTemplate(
            buffer,
            pagesize=self.pagesize,
            rightMargin=72,
            leftMargin=72,
            topMargin=72,
            bottomMargin=72,
        )
        doc.build(self.elements)
        return buffer


class SliceRunPDF(PDFReportGenerator):
    '''Run report: parameters and totals, activations per plane, per-plane table.

    `planes` holds objects with index, z, active_maps, activations,
    cuboid_tests and wall_time (sweep summaries or stored plane rows).
    '''

    def __init__(self, title, summary, planes):
        super().__init__(title)
        self.summary = summary
        self.planes = list(planes)

    def activation_chart(self):
        figure = Figure(figsize=(8, 4))
        axes = figure.subplots()
        heights = [plane.z for plane in self.planes]
        axes.plot(heights, [plane.activations for plane in self.planes], marker='o', color=ACCENT, label='activations')
        axes.plot(heights, [plane.cuboid_tests for plane in self.planes], marker='.', color='#888888', label='cuboid tests')
        axes.set_xlabel('plane height z')
        axes.set_ylabel('count')
        axes.legend()
        axes.grid(alpha=0.3)
        return figure

    def build(self):
        self.add_header()
        self.add_summary_boxes([{'label': label, 'value': str(value)} for label, value in self.summary.items()])

        if self.planes:
            self.add_section_heading('Activations per Plane')
            self.add_figure(self.activation_chart())

        self.add_section_heading('Planes')
        headers = ['Plane', 'z', 'Active maps', 'Activations', 'Cuboid tests', 'Time (s)']
        rows = [
            [str(plane.index), f'{plane.z:.6g}', str(plane.active_maps), str(plane.activations),
             str(plane.cuboid_tests), f'{plane.wall_time:.4f}']
            for plane in self.planes
        ]
        self.add_table(headers, rows, col_widths=[0.7 * inch, 1 * inch, 1 * inch, 1 * inch, 1.1 * inch, 0.9 * inch])
        return self
